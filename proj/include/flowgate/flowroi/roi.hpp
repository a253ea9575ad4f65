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

// Motion-driven region of interest: an intensity map is built from the flow
// segment, a center is drawn from its x/y marginals, and a half-size patch
// around it is cut from every RGB frame and upsampled back to full size.

#pragma once

#include <torch/types.h>

#include <cstdint>

#include "flowgate/rng.hpp"

namespace flowgate::flowroi {

inline constexpr int kRoiCandidates = 10;
inline constexpr double kNormEpsilon = 1e-8;

struct IntensityMap {
  torch::Tensor data;     // H x W, entries are 0 or >= threshold
  double threshold = 0.0; // mean of the map before zeroing
};

struct RoiCenter {
  double cx = 0.0;  // column
  double cy = 0.0;  // row
};

// flow: 2 x N x H x W. The result does not depend on the order of the N frames,
// bit for bit.
IntensityMap motion_intensity_map(const torch::Tensor& flow);

// Throws NoMotion when the map has no positive entry.
RoiCenter sample_roi_center(const IntensityMap& map, Rng& rng);

// Frame center when the map is empty; `fallback` reports which path was taken.
RoiCenter roi_center_or_fallback(const IntensityMap& map, Rng& rng, bool* fallback = nullptr);

// Top-left corner of the patch_size x patch_size window around `center`,
// clamped so the window stays inside a size x size frame.
std::pair<std::int64_t, std::int64_t> roi_origin(const RoiCenter& center, std::int64_t size,
                                                 std::int64_t patch_size);

// rgb: 3 x N x S x S -> 3 x N x S x S. The patch is S/2 unless given.
torch::Tensor extract_roi(const torch::Tensor& rgb, const RoiCenter& center,
                          std::int64_t patch_size = 0);

// Bicubic (a = -0.75, half-pixel centers, clamped borders) resize of the last
// two dimensions; leading dimensions are treated as independent planes.
torch::Tensor bicubic_resize(const torch::Tensor& planes, std::int64_t out_h,
                             std::int64_t out_w);

}  // namespace flowgate::flowroi
