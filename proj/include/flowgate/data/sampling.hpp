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

#pragma once

#include <torch/types.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowgate::data {

struct SamplingConfig {
  std::int64_t n_frames = 16;
  double target_fps = 7.5;
  // Window advance, in resampled frames. Defaults to n_frames (non-overlapping
  // RGB windows; consecutive windows share their boundary flow frame).
  std::int64_t stride = 16;

  std::int64_t raw_frames_per_segment() const { return n_frames + 1; }
  // Seconds covered by the RGB part of one segment.
  double temporal_footprint() const { return static_cast<double>(n_frames) / target_fps; }

  void validate() const;
};

// A decoded video: T x 3 x H x W float frames in [0, 1].
struct Clip {
  torch::Tensor frames;
  double fps = 30.0;
  std::string source_id;

  std::int64_t length() const { return frames.defined() ? frames.size(0) : 0; }
};

// N+1 consecutive resampled frames; frames 0..N-1 form the RGB segment and the
// N consecutive pairs produce the flow segment.
struct RawSegment {
  torch::Tensor frames;  // (N+1) x 3 x H x W
  std::string source_id;
  double start_time = 0.0;
};

struct SegmentPair {
  torch::Tensor rgb;   // 3 x N x H x W
  torch::Tensor flow;  // 2 x N x H x W
  std::optional<std::int64_t> label;
  std::string source_id;
};

// Native-frame indices selected when resampling `native_count` frames from
// `native_fps` down to `target_fps` with nearest-index selection.
std::vector<std::int64_t> resample_indices(std::int64_t native_count, double native_fps,
                                           double target_fps);

struct SegmentWindow {
  std::int64_t first_resampled = 0;            // index into the resampled sequence
  std::vector<std::int64_t> native_indices;    // N+1 entries
  double start_time = 0.0;                     // seconds
};

// Window plan without touching pixel data.
std::vector<SegmentWindow> plan_segments(std::int64_t native_count, double native_fps,
                                         const SamplingConfig& cfg);

std::vector<RawSegment> sample_segments(const Clip& clip, const SamplingConfig& cfg);

// Splits a raw segment into the RGB part, laid out channel-first (3 x N x H x W).
torch::Tensor rgb_segment(const RawSegment& raw);

}  // namespace flowgate::data
