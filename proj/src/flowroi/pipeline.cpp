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

#include "flowgate/flowroi/pipeline.hpp"

#include <torch/torch.h>

#include "flowgate/rng.hpp"

namespace flowgate::flowroi {

std::vector<PreparedSegment> prepare_segments(const data::Clip& clip,
                                              const data::SamplingConfig& sampling,
                                              const FlowProvider& provider, std::uint64_t seed,
                                              std::optional<std::int64_t> label) {
  std::vector<PreparedSegment> out;
  const auto raws = data::sample_segments(clip, sampling);
  for (std::size_t k = 0; k < raws.size(); ++k) {
    const auto& raw = raws[k];
    PreparedSegment seg;
    auto flow = compute_flow_segment(raw, provider);
    Rng rng(derive_seed(seed, {k}));
    seg.center = roi_center_or_fallback(motion_intensity_map(flow), rng, &seg.fallback);
    seg.pair.rgb = extract_roi(data::rgb_segment(raw), seg.center);
    seg.pair.flow = flow;
    seg.pair.label = label;
    seg.pair.source_id = raw.source_id;
    seg.start_time = raw.start_time;
    out.push_back(std::move(seg));
  }
  return out;
}

}  // namespace flowgate::flowroi
