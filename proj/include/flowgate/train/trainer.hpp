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

// Supervised training and inference for the flow-gated network.

#pragma once

#include <torch/types.h>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowgate/augment/augment.hpp"
#include "flowgate/data/dataset.hpp"
#include "flowgate/model/fgn.hpp"
#include "flowgate/train/schedule.hpp"

namespace flowgate::train {

struct EpochRecord {
  std::int64_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double lr = 0.0;
  double wall_time = 0.0;  // seconds spent in this epoch

  // `with_time` false drops the wall-clock field for run-to-run comparison.
  nlohmann::json to_json(bool with_time = true) const;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::int64_t best_epoch = -1;
  std::string stop_reason;  // "early_stop" or "max_epochs"

  nlohmann::json to_json(bool with_time = true) const;
  // One JSON line per epoch followed by a summary line.
  void write_jsonl(const std::filesystem::path& path) const;
};

using LossFn = std::function<torch::Tensor(const torch::Tensor& logits, const torch::Tensor& target)>;

struct TrainHooks {
  LossFn loss;  // replaces the configured loss when set
  std::function<void(const EpochRecord&)> on_epoch;
  std::filesystem::path dump_dir;  // receives nonfinite_dump.json on NonFiniteLoss
};

// One mini-batch.
struct Batch {
  torch::Tensor rgb;     // B x 3 x N x S x S
  torch::Tensor flow;    // B x 2 x N x S x S
  torch::Tensor labels;  // B, int64
};

// Loss of `logits` against integer labels for the configured loss kind.
torch::Tensor supervised_loss(const torch::Tensor& logits, const torch::Tensor& labels, LossKind kind);

struct Predictions {
  std::vector<std::int64_t> labels;
  std::vector<double> scores;  // positive-class probability (binary) or top probability
  torch::Tensor probs;         // n x K class probabilities (n x 1 for binary)
  double loss = 0.0;           // mean loss when labels are present
};

// Evaluation-mode pass without augmentation (inputs are standardized).
Predictions predict(model::FgnModelImpl& model, const data::SegmentSource& source,
                    std::int64_t batch_size, LossKind kind, const LossFn& loss_override = {});

// SGD with the cosine schedule stepped per epoch and early stopping on the
// validation loss. The returned model holds the best-validation weights.
TrainHistory train_supervised(model::FgnModelImpl& model, const data::SegmentSource& train_set,
                              const data::SegmentSource& val_set, const TrainConfig& cfg,
                              const augment::AugmentConfig& aug, const TrainHooks& hooks = {});

}  // namespace flowgate::train
