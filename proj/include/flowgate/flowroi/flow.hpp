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

#include <functional>

#include "flowgate/data/sampling.hpp"

namespace flowgate::flowroi {

struct FarnebackParams {
  double pyramid_scale = 0.5;
  int levels = 3;
  int window_size = 15;
  int iterations = 3;
  int poly_n = 5;
  double poly_sigma = 1.2;

  void validate() const;
};

// Flow fields are 2 x H x W tensors: channel 0 is x-displacement, channel 1 is
// y-displacement, in pixels, such that prev(y, x) ~ next(y + fy, x + fx).
using FlowField = torch::Tensor;

// Any dense flow estimator (prev gray, next gray) -> 2 x H x W. Everything
// downstream of flow estimation takes one of these, so tests can inject
// analytic fields.
using FlowProvider = std::function<FlowField(const torch::Tensor&, const torch::Tensor&)>;

// 3 x H x W RGB -> H x W luma (0.299, 0.587, 0.114).
torch::Tensor to_gray(const torch::Tensor& rgb);

// Gray frames are H x W, values in [0, 1].
FlowField farneback_flow(const torch::Tensor& prev, const torch::Tensor& next,
                         const FarnebackParams& params = {});

FlowProvider farneback_provider(FarnebackParams params = {});

// Slot i holds flow(frame_i, frame_{i+1}); output is 2 x N x H x W.
torch::Tensor compute_flow_segment(const data::RawSegment& raw, const FlowProvider& provider);
torch::Tensor compute_flow_segment(const data::RawSegment& raw,
                                   const FarnebackParams& params = {});

}  // namespace flowgate::flowroi
