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

#include "flowgate/model/accounting.hpp"

#include <torch/torch.h>

#include "flowgate/error.hpp"

namespace flowgate::model {

std::int64_t count_params(const torch::nn::Module& module) {
  std::int64_t n = 0;
  for (const auto& p : module.parameters()) n += p.numel();
  return n;
}

std::int64_t count_macs(const FgnModelImpl& model, c10::IntArrayRef input_shape) {
  if (input_shape.size() != 5) {
    fail(ErrorCode::ShapeMismatch, "count_macs expects a B x 3 x N x H x W input shape");
  }
  const VolumeShape in{3, input_shape[2], input_shape[3], input_shape[4]};
  std::int64_t macs = 0;
  const auto r = model.rgb->trace(in, &macs);
  const auto f = model.flow->trace({2, in.t, in.h, in.w}, &macs);
  if (!(r == f)) fail(ErrorCode::ShapeMismatch, "branch outputs disagree in shape");
  auto gated = r;
  gated.t /= model.config().temporal_pool;
  const auto m = model.merge->trace(gated, &macs);
  if (m.numel() < 1) fail(ErrorCode::ShapeMismatch, "input too small for the pooling stack");
  macs += model.classifier->trace_macs();
  return macs;
}

std::int64_t count_macs(const FgnConfig& cfg) {
  FgnModelImpl model(cfg);
  return count_macs(model, {1, 3, cfg.n_frames, cfg.frame_size, cfg.frame_size});
}

}  // namespace flowgate::model
