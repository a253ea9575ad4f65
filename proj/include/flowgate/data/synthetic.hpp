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

// Synthetic "motion" vs "static" clips: a desk-scale stand-in for a
// fight/non-fight surveillance dataset. Both classes share the background and
// the blob appearance for a given seed; only the blob trajectories differ.

#pragma once

#include <cstdint>
#include <string>

#include "flowgate/data/sampling.hpp"

namespace flowgate::data {

enum class ClipClass { Motion, Static };

std::string to_string(ClipClass c);
ClipClass clip_class_from_string(const std::string& s);

struct SyntheticSpec {
  ClipClass clip_class = ClipClass::Motion;
  double duration = 5.0;      // seconds
  double fps = 30.0;
  std::int64_t size = 224;    // frames are size x size
  int blobs = 0;              // 0: seed picks 1 or 2
  double blob_sigma = 0.07;   // Gaussian radius, fraction of `size`
  double blob_speed = 0.7;    // fraction of `size` travelled per second
  double jitter_prob = 0.02;  // static class: chance of a 1 px camera shake per frame
};

// Requires duration * fps >= min_frames (the caller's N+1).
Clip generate_synthetic_clip(const SyntheticSpec& spec, std::uint64_t seed,
                             std::int64_t min_frames = 17);

// Mean absolute per-pixel difference between consecutive frames.
double mean_interframe_difference(const torch::Tensor& frames);

}  // namespace flowgate::data
