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

#include <c10/util/ArrayRef.h>

#include <cstdint>

#include "flowgate/model/fgn.hpp"

namespace flowgate::model {

// Trainable parameters only (batch-norm running statistics are buffers).
std::int64_t count_params(const torch::nn::Module& module);

// Multiply-accumulates for one sample's forward pass, counting one per
// multiply-add in convolutions and linear layers and nothing for
// normalization, activation, pooling or the gate product. `input_shape` is the
// rgb input shape, B x 3 x N x H x W; B does not affect the result.
std::int64_t count_macs(const FgnModelImpl& model, c10::IntArrayRef input_shape);

// Same count from a configuration alone, without allocating weights.
std::int64_t count_macs(const FgnConfig& cfg);

}  // namespace flowgate::model
