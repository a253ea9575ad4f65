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

#include "flowgate/vicreg/ssl_model.hpp"

#include <torch/torch.h>

#include <string>

#include "flowgate/error.hpp"

namespace flowgate::vicreg {

void ExpanderConfig::validate() const {
  if (input_dim < 1 || dims.empty()) {
    fail(ErrorCode::BadConfig, "expander needs a positive input_dim and at least one layer");
  }
  for (auto d : dims) {
    if (d < 1) fail(ErrorCode::BadConfig, "expander layer widths must be positive");
  }
}

ExpanderImpl::ExpanderImpl(const ExpanderConfig& cfg) {
  cfg.validate();
  std::int64_t in = cfg.input_dim;
  for (std::size_t i = 0; i < cfg.dims.size(); ++i) {
    const auto tag = std::to_string(i + 1);
    fc_.push_back(register_module("fc" + tag, torch::nn::Linear(in, cfg.dims[i])));
    if (i + 1 < cfg.dims.size()) {
      bn_.push_back(register_module("bn" + tag, torch::nn::BatchNorm1d(cfg.dims[i])));
    }
    in = cfg.dims[i];
  }
}

torch::Tensor ExpanderImpl::forward(torch::Tensor x) {
  for (std::size_t i = 0; i < fc_.size(); ++i) {
    x = fc_[i](x);
    if (i < bn_.size()) x = torch::relu(bn_[i](x));
  }
  return x;
}

std::int64_t ExpanderImpl::output_dim() const { return fc_.back()->options.out_features(); }

VicregModelImpl::VicregModelImpl(const model::FgnConfig& fgn, const ExpanderConfig& expander_cfg,
                                 bool keep_temporal_pool)
    : fgn_cfg_(fgn), exp_cfg_(expander_cfg), keep_temporal_pool_(keep_temporal_pool) {
  model::FgnModelImpl base(fgn);
  const auto width = base.feature_width(keep_temporal_pool);
  if (width != expander_cfg.input_dim) {
    fail(ErrorCode::DimMismatch, "expander input_dim " + std::to_string(expander_cfg.input_dim) +
                                     " does not match merging-block width " +
                                     std::to_string(width));
  }
  rgb = register_module("rgb", base.rgb);
  flow = register_module("flow", base.flow);
  merge = register_module("merge", base.merge);
  expander = register_module("expander", Expander(expander_cfg));
}

torch::Tensor VicregModelImpl::merged(torch::Tensor x) {
  if (keep_temporal_pool_) x = torch::max_pool3d(x, {fgn_cfg_.temporal_pool, 1, 1});
  return merge(x).flatten(1);
}

torch::Tensor VicregModelImpl::represent_rgb(const torch::Tensor& rgb_view) {
  return merged(torch::relu(rgb(rgb_view)));
}

torch::Tensor VicregModelImpl::represent_flow(const torch::Tensor& flow_view) {
  return merged(torch::sigmoid(flow(flow_view)));
}

std::pair<torch::Tensor, torch::Tensor> VicregModelImpl::forward(const torch::Tensor& rgb_view,
                                                                 const torch::Tensor& flow_view) {
  if (rgb_view.dim() != 5 || flow_view.dim() != 5 || rgb_view.size(0) != flow_view.size(0) ||
      rgb_view.size(1) != 3 || flow_view.size(1) != 2) {
    fail(ErrorCode::ShapeMismatch, "expected rgb (B,3,N,S,S) and flow (B,2,N,S,S) views");
  }
  return {expander(represent_rgb(rgb_view)), expander(represent_flow(flow_view))};
}

VicregModel build_ssl_model(const model::FgnConfig& fgn, const ExpanderConfig& expander,
                            std::uint64_t seed, bool keep_temporal_pool) {
  fgn.validate();
  expander.validate();
  torch::manual_seed(seed);
  return VicregModel(fgn, expander, keep_temporal_pool);
}

}  // namespace flowgate::vicreg
