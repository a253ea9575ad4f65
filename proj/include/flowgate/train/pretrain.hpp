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

// Self-supervised pretraining of the joint-stream model.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowgate/augment/augment.hpp"
#include "flowgate/data/dataset.hpp"
#include "flowgate/train/schedule.hpp"
#include "flowgate/vicreg/diagnostics.hpp"
#include "flowgate/vicreg/loss.hpp"
#include "flowgate/vicreg/ssl_model.hpp"

namespace flowgate::train {

struct PretrainConfig {
  TrainConfig train;           // batch size, epochs, schedule, seed
  std::int64_t iterations = 0;  // > 0 caps the number of optimizer steps
  std::int64_t log_interval = 10;
  bool early_stopping = true;  // on the mean epoch loss
  vicreg::VicregWeights weights;
  double collapse_threshold = 0.01;
  int collapse_patience = 3;
  double max_grad_norm = 5.0;  // global L2 clip before each step, 0 disables

  void validate() const;
};

struct PretrainLogEntry {
  std::int64_t iteration = 0;  // 1-based optimizer step
  std::int64_t epoch = 0;
  double lr = 0.0;
  double grad_norm = 0.0;  // before clipping
  vicreg::LossBreakdown loss;
  vicreg::CollapseDiagnostics z;
  vicreg::CollapseDiagnostics z_prime;

  nlohmann::json to_json() const;
};

struct PretrainResult {
  std::vector<double> losses;  // total loss per iteration
  std::vector<PretrainLogEntry> log;
  std::int64_t iterations = 0;
  bool collapse_detected = false;
  std::string stop_reason;  // "iterations", "early_stop" or "max_epochs"

  nlohmann::json summary() const;
};

PretrainResult pretrain_vicreg(vicreg::VicregModelImpl& model, const data::SegmentSource& unlabeled,
                               const PretrainConfig& cfg, const augment::AugmentConfig& aug,
                               const std::function<void(const PretrainLogEntry&)>& on_log = {});

}  // namespace flowgate::train
