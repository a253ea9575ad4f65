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

// Experiment configuration: one JSON document validated against
// schema/experiment.schema.json, with defaults filled in for absent fields.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowgate/augment/augment.hpp"
#include "flowgate/data/sampling.hpp"
#include "flowgate/data/synthetic.hpp"
#include "flowgate/flowroi/flow.hpp"
#include "flowgate/model/fgn.hpp"
#include "flowgate/train/pretrain.hpp"
#include "flowgate/train/schedule.hpp"
#include "flowgate/train/transfer.hpp"
#include "flowgate/vicreg/ssl_model.hpp"

namespace flowgate::cli {

struct SyntheticDataConfig {
  std::int64_t train_clips = 100;
  std::int64_t val_clips = 25;
  data::SyntheticSpec spec;  // clip_class and size are set per clip
};

struct DataConfig {
  std::filesystem::path root = "data/raw";
  std::filesystem::path segments = "data/segments";
  std::int64_t frame_size = 224;
  double default_fps = 30.0;
  SyntheticDataConfig synthetic;
  flowroi::FarnebackParams flow;
};

struct VicregSection {
  vicreg::VicregWeights weights;
  std::vector<std::int64_t> expander_dims{8192, 8192, 8192};
  bool keep_temporal_pool = false;
  std::int64_t batch_size = 16;
  std::int64_t epochs = 30;
  std::int64_t iterations = 0;
  std::int64_t log_interval = 10;
  bool early_stopping = true;
  double collapse_threshold = 0.01;
  int collapse_patience = 3;
  double max_grad_norm = 5.0;
};

struct EvalSection {
  double threshold = 0.5;
  std::vector<std::int64_t> top_k{1, 5};
  data::Split split = data::Split::Val;
  std::filesystem::path checkpoint;  // empty: <output>/model
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "runs/latest";
  DataConfig data;
  data::SamplingConfig sampling;
  augment::AugmentConfig augment;
  model::FgnConfig model;  // n_frames and frame_size follow sampling and data
  VicregSection vicreg;
  train::TrainConfig train;
  std::filesystem::path pretrained;  // empty: <output>/ssl
  train::TransferPolicy transfer;
  EvalSection eval;

  nlohmann::json to_json() const;

  vicreg::ExpanderConfig expander_config() const;
  train::PretrainConfig pretrain_config() const;
};

// The published schema document.
const nlohmann::json& experiment_schema();

// Validation error messages carry a JSON-pointer path, e.g. "/train/lr: ...".
// Throws ConfigInvalid.
void validate_against_schema(const nlohmann::json& doc, const nlohmann::json& schema);

// Schema check, then defaults, then cross-field checks (ConfigInvalid).
ExperimentConfig parse_config(const nlohmann::json& doc);

// Reads a config file; a missing or unreadable file throws IoError naming it.
nlohmann::json read_config_file(const std::filesystem::path& path);

// Applies "a.b.c=value" overrides; value is parsed as JSON when possible and
// kept as a string otherwise. Only scalar targets may be overridden.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace flowgate::cli
