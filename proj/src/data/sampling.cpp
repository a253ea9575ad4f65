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

#include "flowgate/data/sampling.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cmath>

#include "flowgate/error.hpp"

namespace flowgate::data {

void SamplingConfig::validate() const {
  if (n_frames < 2) fail(ErrorCode::BadConfig, "sampling.n_frames must be >= 2");
  if (!(target_fps > 0.0)) fail(ErrorCode::BadConfig, "sampling.target_fps must be > 0");
  if (stride < 1) fail(ErrorCode::BadConfig, "sampling.stride must be >= 1");
}

std::vector<std::int64_t> resample_indices(std::int64_t native_count, double native_fps,
                                           double target_fps) {
  if (!(native_fps > 0.0) || !(target_fps > 0.0)) {
    fail(ErrorCode::UnsupportedRate, "frame rates must be positive");
  }
  if (native_fps < target_fps) {
    fail(ErrorCode::UnsupportedRate, "native fps " + std::to_string(native_fps) +
                                         " is below target fps " +
                                         std::to_string(target_fps));
  }
  const double ratio = native_fps / target_fps;
  // Number of target-rate ticks that fit in the clip's duration.
  const auto count = static_cast<std::int64_t>(
      std::floor(static_cast<double>(native_count) / ratio + 1e-9));
  std::vector<std::int64_t> idx;
  idx.reserve(static_cast<std::size_t>(count));
  for (std::int64_t k = 0; k < count; ++k) {
    const auto nearest = static_cast<std::int64_t>(std::floor(k * ratio + 0.5));
    idx.push_back(std::min(nearest, native_count - 1));
  }
  return idx;
}

std::vector<SegmentWindow> plan_segments(std::int64_t native_count, double native_fps,
                                         const SamplingConfig& cfg) {
  cfg.validate();
  const auto idx = resample_indices(native_count, native_fps, cfg.target_fps);
  const std::int64_t need = cfg.raw_frames_per_segment();
  const auto available = static_cast<std::int64_t>(idx.size());
  if (available < need) {
    fail(ErrorCode::VideoTooShort, std::to_string(available) +
                                       " resampled frames, need " + std::to_string(need));
  }
  std::vector<SegmentWindow> windows;
  for (std::int64_t start = 0; start + need <= available; start += cfg.stride) {
    SegmentWindow w;
    w.first_resampled = start;
    w.native_indices.assign(idx.begin() + start, idx.begin() + start + need);
    w.start_time = static_cast<double>(w.native_indices.front()) / native_fps;
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<RawSegment> sample_segments(const Clip& clip, const SamplingConfig& cfg) {
  if (!clip.frames.defined() || clip.frames.dim() != 4 || clip.frames.size(1) != 3) {
    fail(ErrorCode::ShapeMismatch, "clip frames must be T x 3 x H x W");
  }
  const auto windows = plan_segments(clip.length(), clip.fps, cfg);
  std::vector<RawSegment> out;
  out.reserve(windows.size());
  for (const auto& w : windows) {
    auto index = torch::tensor(w.native_indices, torch::kLong);
    out.push_back(RawSegment{clip.frames.index_select(0, index).contiguous(),
                             clip.source_id, w.start_time});
  }
  return out;
}

torch::Tensor rgb_segment(const RawSegment& raw) {
  const auto n = raw.frames.size(0) - 1;
  return raw.frames.narrow(0, 0, n).permute({1, 0, 2, 3}).contiguous();
}

}  // namespace flowgate::data
