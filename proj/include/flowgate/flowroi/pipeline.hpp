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

// Clip to model-ready segments: resample, estimate flow, pick a motion ROI and
// crop the RGB frames to it.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flowgate/data/sampling.hpp"
#include "flowgate/flowroi/flow.hpp"
#include "flowgate/flowroi/roi.hpp"

namespace flowgate::flowroi {

struct PreparedSegment {
  data::SegmentPair pair;
  RoiCenter center;
  bool fallback = false;  // no motion: the frame center was used
  double start_time = 0.0;
};

// Segment k draws its ROI from Rng(derive_seed(seed, {k})).
std::vector<PreparedSegment> prepare_segments(const data::Clip& clip,
                                              const data::SamplingConfig& sampling,
                                              const FlowProvider& provider, std::uint64_t seed,
                                              std::optional<std::int64_t> label = std::nullopt);

}  // namespace flowgate::flowroi
