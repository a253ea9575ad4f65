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

#include "flowgate/flowroi/roi.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "flowgate/error.hpp"

namespace flowgate::flowroi {
namespace {

// Per-frame magnitude of the normalized, mean-subtracted flow. Takes one
// contiguous 2 x H x W frame so that the reduction order never depends on
// where the frame sat inside the segment.
torch::Tensor frame_magnitude(const torch::Tensor& frame) {
  auto f = frame.to(torch::kFloat64);
  auto mean = f.mean({1, 2}, true);
  auto std = f.std({1, 2}, /*unbiased=*/false, true);
  auto z = (f - mean) / (std + kNormEpsilon);
  z = z - z.mean();
  return (z[0].square() + z[1].square()).sqrt();
}

std::int64_t draw_from_cdf(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform() * cdf.back();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::int64_t>(it - cdf.begin(), static_cast<std::int64_t>(cdf.size()) - 1);
}

std::vector<double> cumulative(const torch::Tensor& weights) {
  auto w = weights.to(torch::kFloat64).contiguous();
  const auto* p = w.data_ptr<double>();
  std::vector<double> cdf(static_cast<std::size_t>(w.numel()));
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  return cdf;
}

}  // namespace

IntensityMap motion_intensity_map(const torch::Tensor& flow) {
  if (flow.dim() != 4 || flow.size(0) != 2) {
    fail(ErrorCode::ShapeMismatch, "flow segment must be 2 x N x H x W");
  }
  const auto n = flow.size(1);
  std::vector<torch::Tensor> mags;
  mags.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    mags.push_back(frame_magnitude(flow.select(1, i).contiguous()));
  }
  // Sorting along the frame axis makes the per-pixel sum order-independent.
  auto stacked = std::get<0>(torch::stack(mags).sort(0));
  auto sum = stacked.sum(0);

  IntensityMap map;
  map.threshold = sum.mean().item<double>();
  sum.masked_fill_(sum < map.threshold, 0.0);
  map.data = sum.to(torch::kFloat32);
  map.threshold = static_cast<double>(static_cast<float>(map.threshold));
  return map;
}

RoiCenter sample_roi_center(const IntensityMap& map, Rng& rng) {
  if (!map.data.defined() || map.data.dim() != 2) {
    fail(ErrorCode::ShapeMismatch, "intensity map must be H x W");
  }
  if (!(map.data.max().item<double>() > 0.0)) {
    fail(ErrorCode::NoMotion, "intensity map is identically zero");
  }
  const auto x_cdf = cumulative(map.data.sum(0));  // column sums
  const auto y_cdf = cumulative(map.data.sum(1));  // row sums
  double sx = 0.0, sy = 0.0;
  for (int k = 0; k < kRoiCandidates; ++k) {
    sx += static_cast<double>(draw_from_cdf(x_cdf, rng));
    sy += static_cast<double>(draw_from_cdf(y_cdf, rng));
  }
  return RoiCenter{sx / kRoiCandidates, sy / kRoiCandidates};
}

RoiCenter roi_center_or_fallback(const IntensityMap& map, Rng& rng, bool* fallback) {
  try {
    auto c = sample_roi_center(map, rng);
    if (fallback) *fallback = false;
    return c;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoMotion) throw;
    if (fallback) *fallback = true;
    return RoiCenter{static_cast<double>(map.data.size(1)) / 2.0,
                     static_cast<double>(map.data.size(0)) / 2.0};
  }
}

std::pair<std::int64_t, std::int64_t> roi_origin(const RoiCenter& center, std::int64_t size,
                                                 std::int64_t patch_size) {
  const auto half = static_cast<double>(patch_size) / 2.0;
  auto x0 = static_cast<std::int64_t>(std::lround(center.cx - half));
  auto y0 = static_cast<std::int64_t>(std::lround(center.cy - half));
  x0 = std::clamp<std::int64_t>(x0, 0, size - patch_size);
  y0 = std::clamp<std::int64_t>(y0, 0, size - patch_size);
  return {x0, y0};
}

torch::Tensor extract_roi(const torch::Tensor& rgb, const RoiCenter& center,
                          std::int64_t patch_size) {
  if (rgb.dim() != 4 || rgb.size(2) != rgb.size(3)) {
    fail(ErrorCode::ShapeMismatch, "rgb segment must be C x N x S x S");
  }
  const auto size = rgb.size(3);
  if (patch_size <= 0) patch_size = size / 2;
  const auto [x0, y0] = roi_origin(center, size, patch_size);
  auto patch = rgb.narrow(2, y0, patch_size).narrow(3, x0, patch_size);
  return bicubic_resize(patch, size, size);
}

torch::Tensor bicubic_resize(const torch::Tensor& planes, std::int64_t out_h,
                             std::int64_t out_w) {
  if (planes.dim() < 2) fail(ErrorCode::ShapeMismatch, "bicubic_resize needs >= 2 dims");
  auto lead = planes.sizes().vec();
  const auto h = lead[lead.size() - 2];
  const auto w = lead[lead.size() - 1];
  lead.resize(lead.size() - 2);
  auto flat = planes.contiguous().view({1, -1, h, w});
  namespace F = torch::nn::functional;
  auto out = F::interpolate(flat, F::InterpolateFuncOptions()
                                      .size(std::vector<int64_t>{out_h, out_w})
                                      .mode(torch::kBicubic)
                                      .align_corners(false));
  lead.push_back(out_h);
  lead.push_back(out_w);
  return out.view(lead);
}

}  // namespace flowgate::flowroi
