// Copyright 2026 The Flowgate Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flowgate/augment/augment.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cmath>

#include "flowgate/error.hpp"
#include "flowgate/flowroi/roi.hpp"

namespace flowgate::augment {
namespace {

torch::Tensor grayscale(const torch::Tensor& rgb) {
  return (0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]).unsqueeze(0);
}

torch::Tensor blend(const torch::Tensor& a, const torch::Tensor& b, double ratio) {
  return (ratio * a + (1.0 - ratio) * b).clamp(0.0, 1.0);
}

torch::Tensor shift_hue(const torch::Tensor& rgb, double offset) {
  auto r = rgb[0], g = rgb[1], b = rgb[2];
  auto maxc = std::get<0>(rgb.max(0));
  auto minc = std::get<0>(rgb.min(0));
  auto eqc = maxc == minc;
  auto cr = maxc - minc;
  auto ones = torch::ones_like(maxc);
  auto s = cr / torch::where(eqc, ones, maxc);
  auto crd = torch::where(eqc, ones, cr);
  auto rc = (maxc - r) / crd;
  auto gc = (maxc - g) / crd;
  auto bc = (maxc - b) / crd;
  auto is_r = maxc == r;
  auto is_g = (maxc == g).logical_and(is_r.logical_not());
  auto is_b = is_r.logical_not().logical_and((maxc == g).logical_not());
  auto h = is_r.to(rgb.dtype()) * (bc - gc) + is_g.to(rgb.dtype()) * (2.0 + rc - bc) +
           is_b.to(rgb.dtype()) * (4.0 + gc - rc);
  h = torch::fmod(h / 6.0 + 1.0, 1.0);
  h = torch::fmod(h + offset + 1.0, 1.0);
  auto v = maxc;

  auto h6 = h * 6.0;
  auto i = torch::floor(h6);
  auto f = h6 - i;
  auto sector = torch::remainder(i, 6.0).to(torch::kLong);
  auto p = (v * (1.0 - s)).clamp(0.0, 1.0);
  auto q = (v * (1.0 - s * f)).clamp(0.0, 1.0);
  auto t = (v * (1.0 - s * (1.0 - f))).clamp(0.0, 1.0);
  const torch::Tensor rs[6] = {v, q, p, p, t, v};
  const torch::Tensor gs[6] = {t, v, v, q, p, p};
  const torch::Tensor bs[6] = {p, p, t, v, v, q};
  auto out_r = torch::zeros_like(v), out_g = torch::zeros_like(v), out_b = torch::zeros_like(v);
  for (int k = 0; k < 6; ++k) {
    auto m = sector == k;
    out_r = torch::where(m, rs[k], out_r);
    out_g = torch::where(m, gs[k], out_g);
    out_b = torch::where(m, bs[k], out_b);
  }
  return torch::stack({out_r, out_g, out_b});
}

}  // namespace

void AugmentConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(jitter_prob) || !prob(flip_prob)) {
    fail(ErrorCode::BadConfig, "augment probabilities must lie in [0, 1]");
  }
  if (jitter_range < 0.0 || jitter_range >= 1.0) {
    fail(ErrorCode::BadConfig, "augment.jitter_range must lie in [0, 1)");
  }
  if (!(zoom_scale.lo > 0.0 && zoom_scale.lo <= zoom_scale.hi && zoom_scale.hi <= 1.0)) {
    fail(ErrorCode::BadConfig, "augment.zoom_scale must be a sub-interval of (0, 1]");
  }
  if (!(zoom_aspect.lo > 0.0 && zoom_aspect.lo <= zoom_aspect.hi)) {
    fail(ErrorCode::BadConfig, "augment.zoom_aspect must be a positive interval");
  }
}

JitterDraw draw_jitter(Rng& rng, const AugmentConfig& cfg) {
  JitterDraw d;
  d.apply = rng.bernoulli(cfg.jitter_prob);
  // Factors are drawn even when skipped so the stream position does not depend
  // on the branch taken.
  const double r = cfg.jitter_range;
  d.brightness = rng.uniform(1.0 - r, 1.0 + r);
  d.contrast = rng.uniform(1.0 - r, 1.0 + r);
  d.saturation = rng.uniform(1.0 - r, 1.0 + r);
  d.hue = rng.uniform(-r, r);
  return d;
}

torch::Tensor apply_jitter(const torch::Tensor& rgb, const JitterDraw& draw) {
  if (!draw.apply) return rgb;
  if (rgb.dim() != 4 || rgb.size(0) != 3) {
    fail(ErrorCode::ShapeMismatch, "color jitter expects a 3 x N x H x W segment");
  }
  auto x = (rgb * draw.brightness).clamp(0.0, 1.0);
  if (draw.contrast != 1.0) {
    // Mean luminance per frame.
    auto mean = grayscale(x).mean({2, 3}, true);
    x = blend(x, mean, draw.contrast);
  }
  if (draw.saturation != 1.0) x = blend(x, grayscale(x), draw.saturation);
  if (draw.hue != 0.0) x = shift_hue(x, draw.hue);
  return x;
}

torch::Tensor color_jitter(const torch::Tensor& rgb, Rng& rng, const AugmentConfig& cfg) {
  return apply_jitter(rgb, draw_jitter(rng, cfg));
}

torch::Tensor flip_flow(const torch::Tensor& flow, bool negate_flow_x) {
  auto f = flow.flip({-1});
  if (negate_flow_x) {
    f = f.clone();
    f[0].neg_();
  }
  return f;
}

std::pair<torch::Tensor, torch::Tensor> flip_pair(const torch::Tensor& rgb,
                                                  const torch::Tensor& flow,
                                                  bool negate_flow_x) {
  return {rgb.flip({-1}), flip_flow(flow, negate_flow_x)};
}

std::pair<torch::Tensor, torch::Tensor> random_flip_pair(const torch::Tensor& rgb,
                                                         const torch::Tensor& flow, Rng& rng,
                                                         const AugmentConfig& cfg,
                                                         bool* flipped) {
  const bool flip = rng.bernoulli(cfg.flip_prob);
  if (flipped) *flipped = flip;
  if (!flip) return {rgb, flow};
  return flip_pair(rgb, flow, cfg.negate_flow_x_on_flip);
}

CropRect sample_zoom_rect(Rng& rng, const AugmentConfig& cfg, std::int64_t height,
                          std::int64_t width) {
  const double area = rng.uniform(cfg.zoom_scale.lo, cfg.zoom_scale.hi) *
                      static_cast<double>(height * width);
  const double log_aspect =
      rng.uniform(std::log(cfg.zoom_aspect.lo), std::log(cfg.zoom_aspect.hi));
  const double aspect = std::exp(log_aspect);
  CropRect r;
  r.w = std::clamp<std::int64_t>(std::llround(std::sqrt(area * aspect)), 1, width);
  r.h = std::clamp<std::int64_t>(std::llround(std::sqrt(area / aspect)), 1, height);
  r.x = rng.uniform_int(width - r.w + 1);
  r.y = rng.uniform_int(height - r.h + 1);
  return r;
}

torch::Tensor apply_crop_resize(const torch::Tensor& segment, const CropRect& rect) {
  const auto h = segment.size(-2);
  const auto w = segment.size(-1);
  auto patch = segment.narrow(-2, rect.y, rect.h).narrow(-1, rect.x, rect.w);
  return flowroi::bicubic_resize(patch, h, w);
}

torch::Tensor zoom_crop(const torch::Tensor& rgb, Rng& rng, const AugmentConfig& cfg) {
  if (rgb.dim() != 4) fail(ErrorCode::ShapeMismatch, "zoom crop expects C x N x H x W");
  return apply_crop_resize(rgb, sample_zoom_rect(rng, cfg, rgb.size(2), rgb.size(3)));
}

torch::Tensor standardize(const torch::Tensor& segment) {
  if (segment.dim() != 4) fail(ErrorCode::ShapeMismatch, "standardize expects C x N x H x W");
  // Double moments: float rounding in the mean of a constant channel would be
  // amplified by 1 / epsilon.
  auto x = segment.to(torch::kFloat64);
  auto mean = x.mean({1, 2, 3}, true);
  auto std = x.std({1, 2, 3}, /*unbiased=*/false, true);
  return ((x - mean) / (std + kStandardizeEpsilon)).to(segment.scalar_type());
}

SslViews make_ssl_views(const data::SegmentPair& pair, Rng& rng, const AugmentConfig& cfg) {
  Rng rgb_rng = rng.split();
  Rng flow_rng = rng.split();
  SslViews v;
  auto x = color_jitter(pair.rgb, rgb_rng, cfg);
  v.rgb = standardize(zoom_crop(x, rgb_rng, cfg));
  v.flow_flipped = flow_rng.bernoulli(cfg.flip_prob);
  v.flow = standardize(v.flow_flipped ? flip_flow(pair.flow, cfg.negate_flow_x_on_flip)
                                      : pair.flow);
  return v;
}

data::SegmentPair primary_augment(const data::SegmentPair& pair, Rng& rng,
                                  const AugmentConfig& cfg) {
  auto rgb = color_jitter(pair.rgb, rng, cfg);
  auto [r, f] = random_flip_pair(rgb, pair.flow, rng, cfg);
  return data::SegmentPair{standardize(r), standardize(f), pair.label, pair.source_id};
}

data::SegmentPair standardize_pair(const data::SegmentPair& pair) {
  return data::SegmentPair{standardize(pair.rgb), standardize(pair.flow), pair.label,
                           pair.source_id};
}

}  // namespace flowgate::augment
