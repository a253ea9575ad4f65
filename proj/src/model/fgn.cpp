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

#include "flowgate/model/fgn.hpp"

#include <torch/torch.h>

#include "flowgate/error.hpp"

namespace flowgate::model {
namespace {

std::string shape_str(const torch::Tensor& t) {
  std::string s = "(";
  for (std::int64_t i = 0; i < t.dim(); ++i) {
    if (i) s += ", ";
    s += std::to_string(t.size(i));
  }
  return s + ")";
}

VolumeShape pool_shape(const VolumeShape& in, const std::array<std::int64_t, 3>& k) {
  return {in.c, in.t / k[0], in.h / k[1], in.w / k[2]};
}

// Spatial extent left after `pools` halvings.
std::int64_t after_halvings(std::int64_t size, std::size_t pools) {
  for (std::size_t i = 0; i < pools; ++i) size /= 2;
  return size;
}

Block make_branch(std::int64_t in, const std::vector<std::int64_t>& channels,
                  const FgnConfig& cfg) {
  Block block;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const bool terminal = i + 1 == channels.size();
    const double p = static_cast<std::int64_t>(i) < cfg.dropout_stages ? cfg.spatial_dropout_p : 0.0;
    block->add_stage(Stage(in, channels[i], std::array<std::int64_t, 3>{1, 2, 2}, terminal, p));
    in = channels[i];
  }
  return block;
}

}  // namespace

FgnConfig FgnConfig::legacy() {
  FgnConfig cfg;
  cfg.n_frames = 64;
  cfg.merge_pool_t = 2;
  return cfg;
}

void FgnConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::BadConfig, m); };
  if (n_frames < 1) bad("model.n_frames must be positive");
  if (frame_size < 1) bad("model.frame_size must be positive");
  if (rgb_channels.empty() || flow_channels.empty() || merge_channels.empty()) {
    bad("every block needs at least one stage");
  }
  if (rgb_channels.back() != flow_channels.back()) {
    bad("rgb and flow branches must end with the same channel count");
  }
  if (rgb_channels.size() != flow_channels.size()) {
    bad("rgb and flow branches must have the same number of stages");
  }
  for (auto v : {rgb_channels, flow_channels, merge_channels, fc_dims}) {
    for (auto c : v) {
      if (c < 1) bad("channel and layer widths must be positive");
    }
  }
  if (merge_pool_t < 1 || temporal_pool < 1 || final_pool_t < 1) bad("pool sizes must be >= 1");
  if (spatial_dropout_p < 0.0 || spatial_dropout_p >= 1.0 || classifier_dropout_p < 0.0 ||
      classifier_dropout_p >= 1.0) {
    bad("dropout probabilities must lie in [0, 1)");
  }
  if (num_classes < 1) bad("model.num_classes must be >= 1");

  // Every pooled extent must stay positive along both paths.
  const auto spatial_branch = after_halvings(frame_size, rgb_channels.size());
  const auto spatial_merge = after_halvings(spatial_branch, merge_channels.size() - 1);
  if (spatial_merge < 1) {
    bad("frame_size " + std::to_string(frame_size) + " is too small for the pooling stack");
  }
  std::int64_t t = n_frames / temporal_pool;
  for (std::size_t i = 0; i + 1 < merge_channels.size(); ++i) t /= merge_pool_t;
  if (t / final_pool_t < 1) {
    bad("n_frames " + std::to_string(n_frames) + " is too short for the temporal pooling");
  }
}

StageImpl::StageImpl(std::int64_t in, std::int64_t out, std::array<std::int64_t, 3> pool_kernel,
                     bool is_terminal, double dropout_p)
    : pool(pool_kernel), terminal(is_terminal) {
  conv_s = register_module(
      "conv_s", torch::nn::Conv3d(torch::nn::Conv3dOptions(in, out, {1, 3, 3}).padding({0, 1, 1})));
  bn_s = register_module("bn_s", torch::nn::BatchNorm3d(out));
  conv_t = register_module(
      "conv_t", torch::nn::Conv3d(torch::nn::Conv3dOptions(out, out, {3, 1, 1}).padding({1, 0, 0})));
  if (!terminal) bn_t = register_module("bn_t", torch::nn::BatchNorm3d(out));
  if (dropout_p > 0.0) drop = register_module("drop", torch::nn::Dropout3d(dropout_p));
}

torch::Tensor StageImpl::forward(torch::Tensor x) {
  x = bn_s(torch::relu(conv_s(x)));
  if (drop) x = drop(x);
  x = conv_t(x);
  if (!terminal) {
    x = bn_t(torch::relu(x));
    if (drop) x = drop(x);
  }
  return torch::max_pool3d(x, {pool[0], pool[1], pool[2]});
}

VolumeShape StageImpl::trace(const VolumeShape& in, std::int64_t* macs) const {
  auto conv = [&](const torch::nn::Conv3d& c, const VolumeShape& s) {
    const auto& o = c->options;
    const auto k = *o.kernel_size();
    const auto p = std::get<torch::ExpandingArray<3>>(o.padding());
    VolumeShape out{o.out_channels(), s.t + 2 * (*p)[0] - k[0] + 1,
                    s.h + 2 * (*p)[1] - k[1] + 1, s.w + 2 * (*p)[2] - k[2] + 1};
    if (macs) *macs += out.numel() * o.in_channels() * k[0] * k[1] * k[2];
    return out;
  };
  if (in.c != conv_s->options.in_channels()) {
    fail(ErrorCode::ShapeMismatch, "stage expects " + std::to_string(conv_s->options.in_channels()) +
                                       " channels, got " + std::to_string(in.c));
  }
  return pool_shape(conv(conv_t, conv(conv_s, in)), pool);
}

void BlockImpl::add_stage(Stage stage) {
  stages_.push_back(register_module("stage" + std::to_string(stages_.size() + 1), stage));
}

torch::Tensor BlockImpl::forward(torch::Tensor x) {
  for (auto& s : stages_) x = s(x);
  return x;
}

VolumeShape BlockImpl::trace(VolumeShape in, std::int64_t* macs) const {
  for (const auto& s : stages_) in = s->trace(in, macs);
  return in;
}

ClassifierImpl::ClassifierImpl(std::int64_t in, const std::vector<std::int64_t>& hidden,
                               std::int64_t out, double dropout_p) {
  std::vector<std::int64_t> widths = hidden;
  widths.push_back(out);
  for (std::size_t i = 0; i < widths.size(); ++i) {
    layers_.push_back(register_module("fc" + std::to_string(i + 1), torch::nn::Linear(in, widths[i])));
    in = widths[i];
  }
  if (dropout_p > 0.0) drop_ = register_module("drop", torch::nn::Dropout(dropout_p));
}

torch::Tensor ClassifierImpl::forward(torch::Tensor x) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i](x);
    if (i + 1 == layers_.size()) break;
    x = torch::relu(x);
    if (i == 0 && drop_) x = drop_(x);
  }
  return x;
}

std::int64_t ClassifierImpl::trace_macs() const {
  std::int64_t macs = 0;
  for (const auto& l : layers_) macs += l->options.in_features() * l->options.out_features();
  return macs;
}

std::int64_t ClassifierImpl::out_features() const {
  return layers_.back()->options.out_features();
}

FgnModelImpl::FgnModelImpl(FgnConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  rgb = register_module("rgb", make_branch(3, cfg_.rgb_channels, cfg_));
  flow = register_module("flow", make_branch(2, cfg_.flow_channels, cfg_));

  const auto spatial = after_halvings(cfg_.frame_size, cfg_.rgb_channels.size());
  Block m;
  std::int64_t in = cfg_.rgb_channels.back();
  std::int64_t remaining = spatial;
  for (std::size_t i = 0; i < cfg_.merge_channels.size(); ++i) {
    const bool last = i + 1 == cfg_.merge_channels.size();
    std::array<std::int64_t, 3> pool{cfg_.merge_pool_t, 2, 2};
    if (last) pool = {cfg_.final_pool_t, remaining, remaining};
    m->add_stage(Stage(in, cfg_.merge_channels[i], pool, /*terminal=*/false, 0.0));
    in = cfg_.merge_channels[i];
    if (!last) remaining /= 2;
  }
  merge = register_module("merge", m);

  classifier = register_module(
      "classifier", Classifier(feature_width(true), cfg_.fc_dims, cfg_.num_classes,
                               cfg_.classifier_dropout_p));
}

void FgnModelImpl::check_inputs(const torch::Tensor& rgb_in, const torch::Tensor& flow_in) const {
  const auto n = cfg_.n_frames;
  const auto s = cfg_.frame_size;
  auto ok = [&](const torch::Tensor& t, std::int64_t c) {
    return t.dim() == 5 && t.size(1) == c && t.size(2) == n && t.size(3) == s && t.size(4) == s;
  };
  if (!ok(rgb_in, 3) || !ok(flow_in, 2) || rgb_in.size(0) != flow_in.size(0)) {
    fail(ErrorCode::ShapeMismatch,
         "expected rgb (B,3," + std::to_string(n) + "," + std::to_string(s) + "," +
             std::to_string(s) + ") and flow (B,2,...) with equal B; got rgb " +
             shape_str(rgb_in) + ", flow " + shape_str(flow_in));
  }
}

torch::Tensor FgnModelImpl::rgb_path(const torch::Tensor& x) { return torch::relu(rgb(x)); }

torch::Tensor FgnModelImpl::flow_path(const torch::Tensor& x) { return torch::sigmoid(flow(x)); }

torch::Tensor FgnModelImpl::temporal_max_pool(const torch::Tensor& x) const {
  return torch::max_pool3d(x, {cfg_.temporal_pool, 1, 1});
}

torch::Tensor FgnModelImpl::merge_flat(const torch::Tensor& x) { return merge(x).flatten(1); }

torch::Tensor FgnModelImpl::gated(const torch::Tensor& rgb_in, const torch::Tensor& flow_in,
                                  ForwardProbe* probe) {
  check_inputs(rgb_in, flow_in);
  auto r = torch::relu(rgb(rgb_in));
  auto f = flow(flow_in);
  if (probe && probe->flow_preactivation_fill) f = torch::full_like(f, *probe->flow_preactivation_fill);
  auto g = torch::sigmoid(f);
  auto merged = r * g;
  if (probe) {
    if (probe->zero_merged) merged = torch::zeros_like(merged);
    probe->rgb_features = r;
    probe->flow_preactivation = f;
    probe->gate = g;
    probe->merged = merged;
  }
  return merged;
}

torch::Tensor FgnModelImpl::forward_features(const torch::Tensor& rgb_in,
                                             const torch::Tensor& flow_in, bool keep_temporal_pool,
                                             ForwardProbe* probe) {
  auto x = gated(rgb_in, flow_in, probe);
  if (keep_temporal_pool) {
    x = temporal_max_pool(x);
    if (probe) probe->pooled = x;
  }
  return merge_flat(x);
}

torch::Tensor FgnModelImpl::forward(const torch::Tensor& rgb_in, const torch::Tensor& flow_in,
                                    ForwardProbe* probe) {
  return classifier(forward_features(rgb_in, flow_in, /*keep_temporal_pool=*/true, probe));
}

VolumeShape FgnModelImpl::branch_output_shape() const {
  return rgb->trace({3, cfg_.n_frames, cfg_.frame_size, cfg_.frame_size}, nullptr);
}

std::int64_t FgnModelImpl::feature_width(bool keep_temporal_pool) const {
  auto s = branch_output_shape();
  if (keep_temporal_pool) s.t /= cfg_.temporal_pool;
  return merge->trace(s, nullptr).numel();
}

FgnModel build_fgn(const FgnConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  torch::manual_seed(seed);
  return FgnModel(cfg);
}

std::string parameter_group(const std::string& name) {
  for (const char* g : {"rgb", "flow", "merge", "classifier", "expander"}) {
    const std::string prefix = std::string(g) + ".";
    if (name.rfind(prefix, 0) == 0) return g;
  }
  return {};
}

}  // namespace flowgate::model
