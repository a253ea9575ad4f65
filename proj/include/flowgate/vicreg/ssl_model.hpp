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

// Joint-stream self-supervised model.
//
//   Z  = h(m(relu(f (X))))     X  : rgb view
//   Z' = h(m(sigmoid(f'(X')))) X' : flow view
//
// f and f' are the two FGN branches with their own weights; the merging
// block m and the expander h are shared by both paths. m skips the temporal
// max pooling unless the ablation flag keeps it. Parameter names reuse the FGN
// namespace ("rgb.", "flow.", "merge.") plus "expander.".

#pragma once

#include <torch/nn/module.h>
#include <torch/nn/modules/batchnorm.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/pimpl.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "flowgate/model/fgn.hpp"

namespace flowgate::vicreg {

struct ExpanderConfig {
  std::int64_t input_dim = 1024;
  std::vector<std::int64_t> dims{8192, 8192, 8192};

  void validate() const;
};

// Linear -> BN -> ReLU for every layer but the last, which is affine only.
class ExpanderImpl : public torch::nn::Module {
 public:
  explicit ExpanderImpl(const ExpanderConfig& cfg);
  torch::Tensor forward(torch::Tensor x);
  std::int64_t output_dim() const;

 private:
  std::vector<torch::nn::Linear> fc_;
  std::vector<torch::nn::BatchNorm1d> bn_;
};
TORCH_MODULE(Expander);

class VicregModelImpl : public torch::nn::Module {
 public:
  VicregModelImpl(const model::FgnConfig& fgn, const ExpanderConfig& expander,
                  bool keep_temporal_pool);

  // (Z, Z') for a batch of rgb views (B,3,N,S,S) and flow views (B,2,N,S,S).
  std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& rgb_view,
                                                  const torch::Tensor& flow_view);

  // Merging-block representation before the expander.
  torch::Tensor represent_rgb(const torch::Tensor& rgb_view);
  torch::Tensor represent_flow(const torch::Tensor& flow_view);

  const model::FgnConfig& fgn_config() const { return fgn_cfg_; }
  const ExpanderConfig& expander_config() const { return exp_cfg_; }
  bool keeps_temporal_pool() const { return keep_temporal_pool_; }

  model::Block rgb{nullptr};
  model::Block flow{nullptr};
  model::Block merge{nullptr};
  Expander expander{nullptr};

 private:
  torch::Tensor merged(torch::Tensor x);

  model::FgnConfig fgn_cfg_;
  ExpanderConfig exp_cfg_;
  bool keep_temporal_pool_;
};
TORCH_MODULE(VicregModel);

// Throws DimMismatch when the expander input differs from the merging-block
// width for the chosen pooling variant.
VicregModel build_ssl_model(const model::FgnConfig& fgn, const ExpanderConfig& expander,
                            std::uint64_t seed, bool keep_temporal_pool = false);

}  // namespace flowgate::vicreg
