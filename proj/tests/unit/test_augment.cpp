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

#include <doctest.h>
#include <torch/torch.h>

#include <cmath>

#include "flowgate/augment/augment.hpp"
#include "flowgate/rng.hpp"

using namespace flowgate;
using namespace flowgate::augment;

namespace {

AugmentConfig never_jitter() {
  AugmentConfig cfg;
  cfg.jitter_prob = 0.0;
  return cfg;
}

torch::Tensor rightward_flow() {
  auto f = torch::zeros({2, 4, 32, 32});
  f[0].narrow(2, 4, 10).fill_(2.0);
  f[1].normal_(0.0, 0.3);
  return f;
}

}  // namespace

TEST_SUITE("augment") {

TEST_CASE("color_jitter: skip draw and unit factors are identities") {
  auto rgb = torch::rand({3, 4, 16, 16});
  Rng rng(1);
  CHECK(torch::equal(color_jitter(rgb, rng, never_jitter()), rgb));
  JitterDraw unit;
  unit.apply = true;
  CHECK(torch::allclose(apply_jitter(rgb, unit), rgb, 0, 1e-6));
}

TEST_CASE("color_jitter: brightness 1.2 maps mid-gray to 0.6") {
  JitterDraw d;
  d.apply = true;
  d.brightness = 1.2;
  auto out = apply_jitter(torch::full({3, 2, 4, 4}, 0.5f), d);
  CHECK(out.min().item<double>() == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(out.max().item<double>() == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("color_jitter property: factors stay in range and output in [0, 1]") {
  AugmentConfig cfg;
  Rng rng(3);
  int applied = 0;
  for (int i = 0; i < 400; ++i) {
    const auto d = draw_jitter(rng, cfg);
    applied += d.apply;
    for (double f : {d.brightness, d.contrast, d.saturation}) {
      CHECK(f >= 0.8);
      CHECK(f <= 1.2);
    }
    CHECK(std::fabs(d.hue) <= 0.2);
  }
  CHECK(applied > 150);
  CHECK(applied < 250);
  for (int i = 0; i < 10; ++i) {
    auto out = color_jitter(torch::rand({3, 2, 8, 8}), rng, cfg);
    CHECK(out.min().item<double>() >= 0.0);
    CHECK(out.max().item<double>() <= 1.0);
  }
}

TEST_CASE("color_jitter: one draw per segment, every frame treated alike") {
  auto frame = torch::rand({3, 1, 8, 8});
  auto seg = frame.expand({3, 5, 8, 8}).contiguous();
  JitterDraw d{true, 1.1, 0.9, 1.15, 0.07};
  auto out = apply_jitter(seg, d);
  for (int t = 1; t < 5; ++t) CHECK(torch::equal(out.select(1, t), out.select(1, 0)));
}

TEST_CASE("flip: double flip is the identity, no-flip draw passes through") {
  auto rgb = torch::rand({3, 2, 8, 8});
  auto flow = torch::randn({2, 2, 8, 8});
  auto [r1, f1] = flip_pair(rgb, flow, true);
  auto [r2, f2] = flip_pair(r1, f1, true);
  CHECK(torch::equal(r2, rgb));
  CHECK(torch::equal(f2, flow));
  AugmentConfig cfg;
  cfg.flip_prob = 0.0;
  Rng rng(0);
  bool flipped = true;
  auto [r3, f3] = random_flip_pair(rgb, flow, rng, cfg, &flipped);
  CHECK_FALSE(flipped);
  CHECK(torch::equal(r3, rgb));
  CHECK(torch::equal(f3, flow));
}

TEST_CASE("flip: rightward motion turns leftward, magnitude is mirrored exactly") {
  auto flow = rightward_flow();
  auto flipped = flip_flow(flow, true);
  CHECK(flow[0].mean().item<double>() > 0.0);
  CHECK(flipped[0].mean().item<double>() == doctest::Approx(-flow[0].mean().item<double>()));
  auto mag = (flow[0].square() + flow[1].square()).sqrt();
  auto mag_flipped = (flipped[0].square() + flipped[1].square()).sqrt();
  CHECK(torch::equal(mag_flipped, mag.flip({-1})));
  // The toggle leaves x untouched.
  auto plain = flip_flow(flow, false);
  CHECK(torch::equal(plain[0], flow[0].flip({-1})));
}

TEST_CASE("zoom_crop: area 0.09 at aspect 1 gives a 67 px side") {
  AugmentConfig cfg;
  cfg.zoom_scale = {0.09, 0.09};
  cfg.zoom_aspect = {1.0, 1.0};
  Rng rng(5);
  const auto r = sample_zoom_rect(rng, cfg, 224, 224);
  CHECK(r.w == 67);
  CHECK(r.h == 67);
  CHECK(r.x + r.w <= 224);
  CHECK(r.y + r.h <= 224);
}

TEST_CASE("zoom_crop: constant input, determinism and shape") {
  AugmentConfig cfg;
  Rng a(8), b(8);
  auto c = torch::full({3, 3, 224, 224}, 0.25f);
  auto out = zoom_crop(c, a, cfg);
  CHECK(out.sizes() == c.sizes());
  CHECK((out - 0.25f).abs().max().item<double>() < 1e-5);
  Rng r1(8), r2(8);
  const auto x = sample_zoom_rect(r1, cfg, 224, 224);
  const auto y = sample_zoom_rect(r2, cfg, 224, 224);
  CHECK(x.x == y.x);
  CHECK(x.y == y.y);
  CHECK(x.w == y.w);
  CHECK(x.h == y.h);
}

TEST_CASE("zoom_crop property: areas fall in the configured range") {
  AugmentConfig cfg;
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto r = sample_zoom_rect(rng, cfg, 224, 224);
    const double frac = static_cast<double>(r.w * r.h) / (224.0 * 224.0);
    CHECK(frac >= 0.075);
    CHECK(frac <= 0.105);
    const double aspect = static_cast<double>(r.w) / static_cast<double>(r.h);
    CHECK(aspect >= 0.7);
    CHECK(aspect <= 1.4);
  }
}

TEST_CASE("zoom_crop: the same rectangle is applied to every frame") {
  auto frame = torch::rand({3, 1, 64, 64});
  auto seg = frame.expand({3, 4, 64, 64}).contiguous();
  AugmentConfig cfg;
  Rng rng(2);
  auto out = zoom_crop(seg, rng, cfg);
  for (int t = 1; t < 4; ++t) CHECK(torch::equal(out.select(1, t), out.select(1, 0)));
}

TEST_CASE("standardize: constant channel, moments, idempotence") {
  CHECK(standardize(torch::full({2, 2, 4, 4}, 3.0f)).abs().max().item<double>() == 0.0);
  torch::manual_seed(1);
  auto x = torch::rand({3, 4, 32, 32}) * 5 + 2;
  auto s = standardize(x);
  for (int c = 0; c < 3; ++c) {
    auto ch = s[c].to(torch::kFloat64);
    CHECK(std::fabs(ch.mean().item<double>()) < 1e-6);
    CHECK(std::fabs(ch.std(false).item<double>() - 1.0) < 1e-4);
  }
  CHECK((standardize(s) - s).abs().max().item<double>() < 1e-5);
}

TEST_CASE("make_ssl_views: shapes, reproducibility, flip rate, flow never jittered") {
  data::SegmentPair pair{torch::rand({3, 4, 32, 32}), torch::randn({2, 4, 32, 32}), {}, "p"};
  AugmentConfig cfg;
  cfg.mode = Mode::Ssl;
  Rng a(4), b(4);
  auto v1 = make_ssl_views(pair, a, cfg);
  auto v2 = make_ssl_views(pair, b, cfg);
  CHECK(v1.rgb.sizes() == torch::IntArrayRef({3, 4, 32, 32}));
  CHECK(v1.flow.sizes() == torch::IntArrayRef({2, 4, 32, 32}));
  CHECK(torch::equal(v1.rgb, v2.rgb));
  CHECK(torch::equal(v1.flow, v2.flow));

  Rng rng(99);
  int flips = 0;
  const auto plain = standardize(pair.flow);
  const auto mirrored = standardize(flip_flow(pair.flow, true));
  for (int i = 0; i < 100; ++i) {
    auto v = make_ssl_views(pair, rng, cfg);
    flips += v.flow_flipped;
    // The flow view is exactly one of the two deterministic candidates.
    CHECK(torch::equal(v.flow, v.flow_flipped ? mirrored : plain));
  }
  CHECK(flips >= 35);
  CHECK(flips <= 65);
}

TEST_CASE("primary_augment: rgb keeps its spatial content, never cropped") {
  auto rgb = torch::rand({3, 2, 16, 16});
  data::SegmentPair pair{rgb, torch::randn({2, 2, 16, 16}), 1, "p"};
  AugmentConfig cfg = never_jitter();
  cfg.flip_prob = 0.0;
  Rng rng(3);
  auto out = primary_augment(pair, rng, cfg);
  CHECK(out.rgb.sizes() == rgb.sizes());
  CHECK(out.label == pair.label);
  CHECK(torch::allclose(out.rgb, standardize(rgb), 1e-5, 1e-5));
}

TEST_CASE("augment property: a seed reproduces a whole batch bit-exactly") {
  std::vector<data::SegmentPair> batch;
  for (int i = 0; i < 4; ++i) {
    batch.push_back({torch::rand({3, 2, 24, 24}), torch::randn({2, 2, 24, 24}), i % 2, "b"});
  }
  AugmentConfig cfg;
  auto run = [&](std::uint64_t seed) {
    std::vector<torch::Tensor> out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Rng rng(derive_seed(seed, {i}));
      auto v = make_ssl_views(batch[i], rng, cfg);
      out.push_back(v.rgb);
      out.push_back(v.flow);
    }
    return out;
  };
  auto a = run(17), b = run(17);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(torch::equal(a[i], b[i]));
}

}  // TEST_SUITE
