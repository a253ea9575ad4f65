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

#include "flowgate/data/synthetic.hpp"

#include <torch/torch.h>

#include <array>
#include <cmath>
#include <vector>

#include "flowgate/error.hpp"
#include "flowgate/rng.hpp"

namespace flowgate::data {
namespace {

constexpr int kGrid = 4;  // background control points per axis (plus one)

struct Blob {
  double x = 0, y = 0;
  double heading = 0;
  double speed = 0;  // px per frame
  std::array<float, 3> color{};
};

// Smooth colored background on a (size+2)^2 canvas so that a +-1 px camera
// shake can be rendered by cropping.
torch::Tensor make_background(Rng& rng, std::int64_t size) {
  const std::int64_t canvas = size + 2;
  std::array<std::array<std::array<double, kGrid + 1>, kGrid + 1>, 3> ctrl{};
  for (auto& ch : ctrl)
    for (auto& row : ch)
      for (auto& v : row) v = rng.uniform(0.2, 0.45);

  auto bg = torch::empty({3, canvas, canvas}, torch::kFloat32);
  auto acc = bg.accessor<float, 3>();
  const double cell = static_cast<double>(canvas - 1) / kGrid;
  for (std::int64_t y = 0; y < canvas; ++y) {
    const double gy = y / cell;
    const int iy = std::min(static_cast<int>(gy), kGrid - 1);
    const double ty = (1 - std::cos(M_PI * (gy - iy))) / 2;
    for (std::int64_t x = 0; x < canvas; ++x) {
      const double gx = x / cell;
      const int ix = std::min(static_cast<int>(gx), kGrid - 1);
      const double tx = (1 - std::cos(M_PI * (gx - ix))) / 2;
      for (int c = 0; c < 3; ++c) {
        const auto& g = ctrl[c];
        const double top = g[iy][ix] * (1 - tx) + g[iy][ix + 1] * tx;
        const double bot = g[iy + 1][ix] * (1 - tx) + g[iy + 1][ix + 1] * tx;
        acc[c][y][x] = static_cast<float>(top * (1 - ty) + bot * ty);
      }
    }
  }
  return bg;
}

}  // namespace

std::string to_string(ClipClass c) { return c == ClipClass::Motion ? "motion" : "static"; }

ClipClass clip_class_from_string(const std::string& s) {
  if (s == "motion") return ClipClass::Motion;
  if (s == "static") return ClipClass::Static;
  fail(ErrorCode::BadConfig, "unknown synthetic class '" + s + "'");
}

Clip generate_synthetic_clip(const SyntheticSpec& spec, std::uint64_t seed,
                             std::int64_t min_frames) {
  const auto frames = static_cast<std::int64_t>(std::llround(spec.duration * spec.fps));
  if (frames < min_frames) {
    fail(ErrorCode::BadConfig, "synthetic clip of " + std::to_string(frames) +
                                   " frames is shorter than " + std::to_string(min_frames));
  }
  if (spec.size < 8) fail(ErrorCode::BadConfig, "synthetic frame size must be >= 8");
  const std::int64_t size = spec.size;

  // Background and blob appearance depend on the seed only, so a motion clip
  // and a static clip with the same seed differ only in how things move.
  Rng bg_rng(derive_seed(seed, {1}));
  Rng blob_rng(derive_seed(seed, {2}));
  Rng path_rng(derive_seed(seed, {3, static_cast<std::uint64_t>(spec.clip_class)}));

  const auto background = make_background(bg_rng, size);
  const int n_blobs = spec.blobs > 0 ? spec.blobs : 1 + static_cast<int>(blob_rng.uniform_int(2));
  const double sigma = spec.blob_sigma * static_cast<double>(size);
  const double margin = 2.0 * sigma;
  const double span = static_cast<double>(size) - 2 * margin;

  std::vector<Blob> blobs(static_cast<std::size_t>(n_blobs));
  for (auto& b : blobs) {
    b.x = margin + blob_rng.uniform() * span;
    b.y = margin + blob_rng.uniform() * span;
    b.heading = blob_rng.uniform(0.0, 2 * M_PI);
    b.speed = spec.blob_speed * static_cast<double>(size) / spec.fps * blob_rng.uniform(0.7, 1.3);
    for (auto& c : b.color) c = static_cast<float>(blob_rng.uniform(0.75, 1.0));
  }

  auto coords = torch::arange(size, torch::kFloat64);
  auto gy = coords.view({size, 1});
  auto gx = coords.view({1, size});

  auto out = torch::empty({frames, 3, size, size}, torch::kFloat32);
  for (std::int64_t t = 0; t < frames; ++t) {
    std::int64_t dx = 0, dy = 0;
    if (spec.clip_class == ClipClass::Static && path_rng.bernoulli(spec.jitter_prob)) {
      dx = path_rng.uniform_int(3) - 1;
      dy = path_rng.uniform_int(3) - 1;
    }
    auto frame = background.narrow(1, 1 + dy, size).narrow(2, 1 + dx, size).clone();
    for (auto& b : blobs) {
      const double bx = b.x + static_cast<double>(dx);
      const double by = b.y + static_cast<double>(dy);
      auto r2 = (gx - bx).square() + (gy - by).square();
      auto alpha = torch::exp(-r2 / (2 * sigma * sigma)).to(torch::kFloat32);
      auto color = torch::tensor({b.color[0], b.color[1], b.color[2]}).view({3, 1, 1});
      frame = frame * (1 - alpha) + color * alpha;
    }
    out[t].copy_(frame);

    if (spec.clip_class == ClipClass::Motion) {
      for (auto& b : blobs) {
        b.heading += 0.25 * path_rng.normal();
        b.x += b.speed * std::cos(b.heading);
        b.y += b.speed * std::sin(b.heading);
        // Reflect off the margins.
        if (b.x < margin) { b.x = 2 * margin - b.x; b.heading = M_PI - b.heading; }
        if (b.x > margin + span) { b.x = 2 * (margin + span) - b.x; b.heading = M_PI - b.heading; }
        if (b.y < margin) { b.y = 2 * margin - b.y; b.heading = -b.heading; }
        if (b.y > margin + span) { b.y = 2 * (margin + span) - b.y; b.heading = -b.heading; }
      }
    }
  }
  return Clip{out.clamp(0.0, 1.0), spec.fps,
              to_string(spec.clip_class) + "-" + std::to_string(seed)};
}

double mean_interframe_difference(const torch::Tensor& frames) {
  if (frames.size(0) < 2) return 0.0;
  const auto n = frames.size(0);
  return (frames.narrow(0, 1, n - 1) - frames.narrow(0, 0, n - 1))
      .abs()
      .mean()
      .item<double>();
}

}  // namespace flowgate::data
