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

// Stochastic view generation. Every draw is made once per segment and applied
// to all of its frames, so temporal structure survives augmentation.

#pragma once

#include <torch/types.h>

#include <cstdint>
#include <utility>

#include "flowgate/data/sampling.hpp"
#include "flowgate/rng.hpp"

namespace flowgate::augment {

enum class Mode { Primary, Ssl };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct AugmentConfig {
  double jitter_range = 0.2;
  double jitter_prob = 0.5;
  double flip_prob = 0.5;
  Interval zoom_scale{0.08, 0.1};
  Interval zoom_aspect{3.0 / 4.0, 4.0 / 3.0};
  bool negate_flow_x_on_flip = true;
  Mode mode = Mode::Primary;

  void validate() const;
};

inline constexpr double kStandardizeEpsilon = 1e-8;

struct JitterDraw {
  bool apply = false;
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  double hue = 0.0;  // fraction of a full hue turn
};

JitterDraw draw_jitter(Rng& rng, const AugmentConfig& cfg);

// rgb: 3 x N x H x W in [0, 1]. Brightness, contrast, saturation, then hue;
// the result is clamped to [0, 1].
torch::Tensor apply_jitter(const torch::Tensor& rgb, const JitterDraw& draw);
torch::Tensor color_jitter(const torch::Tensor& rgb, Rng& rng, const AugmentConfig& cfg);

// Mirrors both streams along the width axis; the flow x channel is negated
// when `negate_flow_x` is set.
std::pair<torch::Tensor, torch::Tensor> flip_pair(const torch::Tensor& rgb,
                                                  const torch::Tensor& flow, bool negate_flow_x);
torch::Tensor flip_flow(const torch::Tensor& flow, bool negate_flow_x);
std::pair<torch::Tensor, torch::Tensor> random_flip_pair(const torch::Tensor& rgb,
                                                         const torch::Tensor& flow, Rng& rng,
                                                         const AugmentConfig& cfg,
                                                         bool* flipped = nullptr);

struct CropRect {
  std::int64_t x = 0, y = 0, w = 0, h = 0;
};

// Area fraction from zoom_scale, log-uniform aspect from zoom_aspect.
CropRect sample_zoom_rect(Rng& rng, const AugmentConfig& cfg, std::int64_t height,
                          std::int64_t width);
torch::Tensor apply_crop_resize(const torch::Tensor& segment, const CropRect& rect);
torch::Tensor zoom_crop(const torch::Tensor& rgb, Rng& rng, const AugmentConfig& cfg);

// Per channel over (N, H, W): (x - mean) / (std + 1e-8), population std.
torch::Tensor standardize(const torch::Tensor& segment);

struct SslViews {
  torch::Tensor rgb;   // X:  3 x N x H x W
  torch::Tensor flow;  // X': 2 x N x H x W
  bool flow_flipped = false;
};

// The two views draw from independent streams split off `rng`.
SslViews make_ssl_views(const data::SegmentPair& pair, Rng& rng, const AugmentConfig& cfg);

// Supervised pipeline: jitter on RGB, joint flip, then standardization.
data::SegmentPair primary_augment(const data::SegmentPair& pair, Rng& rng,
                                  const AugmentConfig& cfg);

// Evaluation path: standardization only.
data::SegmentPair standardize_pair(const data::SegmentPair& pair);

}  // namespace flowgate::augment
