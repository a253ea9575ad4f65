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

// Two-stream flow-gated network.
//
//   rgb  (B,3,N,S,S) -> rgb branch  -> ReLU    --+
//                                                 * -> temporal max pool -> merge -> classifier
//   flow (B,2,N,S,S) -> flow branch -> sigmoid --+
//
// Each branch is four stages of [conv 1x3x3 -> ReLU -> BN -> conv 3x1x1 ->
// ReLU -> BN -> max pool 1x2x2]; the last stage of a branch stops after its
// second convolution so that the branch activation (ReLU or the sigmoid gate)
// is applied to the pooled output. Channel-wise dropout follows every BN of
// the first two stages of each branch. The merging block is three such stages
// (64, 64, 128 channels); the first two pool 1x2x2 (2x2x2 in the legacy
// layout) and the last pools 2 frames and whatever spatial extent remains.
//
// Parameter names are stable and grouped by prefix: "rgb.", "flow.",
// "merge.", "classifier.". Checkpoint transfer relies on this.

#pragma once

#include <torch/nn/module.h>
#include <torch/nn/modules/batchnorm.h>
#include <torch/nn/modules/conv.h>
#include <torch/nn/modules/dropout.h>
#include <torch/nn/modules/linear.h>
#include <torch/nn/pimpl.h>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace flowgate::model {

struct FgnConfig {
  std::int64_t n_frames = 16;
  std::int64_t frame_size = 224;
  std::vector<std::int64_t> rgb_channels{16, 16, 32, 32};
  std::vector<std::int64_t> flow_channels{16, 16, 32, 32};
  std::vector<std::int64_t> merge_channels{64, 64, 128};
  std::int64_t merge_pool_t = 1;   // temporal extent of the intermediate merge pools
  std::int64_t temporal_pool = 8;  // max pool over time applied to the gated features
  std::int64_t final_pool_t = 2;
  std::int64_t dropout_stages = 2;
  double spatial_dropout_p = 0.2;
  double classifier_dropout_p = 0.2;
  std::vector<std::int64_t> fc_dims{128, 32};
  std::int64_t num_classes = 1;  // 1: binary logit, K: class logits

  // N = 64 with 2x2x2 intermediate merge pooling.
  static FgnConfig legacy();

  void validate() const;
};

// C x T x H x W of one sample.
struct VolumeShape {
  std::int64_t c = 0, t = 0, h = 0, w = 0;

  std::int64_t numel() const { return c * t * h * w; }
  bool operator==(const VolumeShape&) const = default;
};

class StageImpl : public torch::nn::Module {
 public:
  // `terminal` stages end after the second convolution's pooling, leaving the
  // activation to the caller.
  StageImpl(std::int64_t in, std::int64_t out, std::array<std::int64_t, 3> pool, bool terminal,
            double dropout_p);

  torch::Tensor forward(torch::Tensor x);

  // Output shape and multiply-accumulate count for one sample.
  VolumeShape trace(const VolumeShape& in, std::int64_t* macs) const;

  torch::nn::Conv3d conv_s{nullptr};
  torch::nn::Conv3d conv_t{nullptr};
  torch::nn::BatchNorm3d bn_s{nullptr};
  torch::nn::BatchNorm3d bn_t{nullptr};
  torch::nn::Dropout3d drop{nullptr};
  std::array<std::int64_t, 3> pool;
  bool terminal;
};
TORCH_MODULE(Stage);

class BlockImpl : public torch::nn::Module {
 public:
  void add_stage(Stage stage);
  torch::Tensor forward(torch::Tensor x);
  VolumeShape trace(VolumeShape in, std::int64_t* macs) const;
  const std::vector<Stage>& stages() const { return stages_; }

 private:
  std::vector<Stage> stages_;
};
TORCH_MODULE(Block);

class ClassifierImpl : public torch::nn::Module {
 public:
  ClassifierImpl(std::int64_t in, const std::vector<std::int64_t>& hidden,
                 std::int64_t out, double dropout_p);
  torch::Tensor forward(torch::Tensor x);
  std::int64_t trace_macs() const;
  std::int64_t out_features() const;

 private:
  std::vector<torch::nn::Linear> layers_;
  torch::nn::Dropout drop_{nullptr};
};
TORCH_MODULE(Classifier);

// Instrumentation for tests and diagnostics. When a fill value is set, the
// flow branch output (before the sigmoid) is replaced by that constant.
struct ForwardProbe {
  std::optional<float> flow_preactivation_fill;
  bool zero_merged = false;  // replace the gated product by zeros

  torch::Tensor rgb_features;        // after ReLU
  torch::Tensor flow_preactivation;  // before sigmoid
  torch::Tensor gate;                // sigmoid(flow_preactivation)
  torch::Tensor merged;              // rgb_features * gate, before temporal pooling
  torch::Tensor pooled;              // after temporal pooling
};

class FgnModelImpl : public torch::nn::Module {
 public:
  explicit FgnModelImpl(FgnConfig cfg);

  // Logits, B x num_classes.
  torch::Tensor forward(const torch::Tensor& rgb, const torch::Tensor& flow,
                        ForwardProbe* probe = nullptr);

  // Flattened merging-block output. Without temporal pooling this is the
  // self-supervised representation (1024 wide by default); with it, the
  // classifier input (128 wide).
  torch::Tensor forward_features(const torch::Tensor& rgb, const torch::Tensor& flow,
                                 bool keep_temporal_pool = false, ForwardProbe* probe = nullptr);

  // Single-stream paths used by the self-supervised model.
  torch::Tensor rgb_path(const torch::Tensor& rgb);
  torch::Tensor flow_path(const torch::Tensor& flow);
  torch::Tensor merge_flat(const torch::Tensor& x);
  torch::Tensor temporal_max_pool(const torch::Tensor& x) const;

  const FgnConfig& config() const { return cfg_; }

  // Per-sample shapes; `keep_temporal_pool` picks the feature width variant.
  VolumeShape branch_output_shape() const;
  std::int64_t feature_width(bool keep_temporal_pool) const;

  Block rgb{nullptr};
  Block flow{nullptr};
  Block merge{nullptr};
  Classifier classifier{nullptr};

 private:
  void check_inputs(const torch::Tensor& rgb, const torch::Tensor& flow) const;
  torch::Tensor gated(const torch::Tensor& rgb, const torch::Tensor& flow, ForwardProbe* probe);

  FgnConfig cfg_;
};
TORCH_MODULE(FgnModel);

// Deterministic given the seed (reseeds the global torch generator).
FgnModel build_fgn(const FgnConfig& cfg, std::uint64_t seed);

// Block group a parameter name belongs to ("rgb", "flow", "merge",
// "classifier", "expander"), or empty.
std::string parameter_group(const std::string& name);

}  // namespace flowgate::model
