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

// Checkpoint directories.
//
//   <dir>/manifest.json   {format_version, config, groups, tensor_count,
//                          tensors: {name: {file, shape}}, metadata}
//   <dir>/<name>.jt       one container file per parameter or buffer
//
// The manifest is validated before any tensor is read. Writes go to a sibling
// temporary directory that is renamed into place.

#pragma once

#include <torch/nn/module.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace flowgate::train {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int format_version = kCheckpointVersion;
  nlohmann::json config;
  nlohmann::json metadata;
  std::vector<std::string> groups;             // sorted block groups present
  std::map<std::string, torch::Tensor> tensors;  // parameters and buffers by name

  bool has_group(const std::string& g) const;
};

// Parameters and buffers of `module`, detached copies keyed by name.
std::map<std::string, torch::Tensor> module_state(const torch::nn::Module& module);

void save_checkpoint(const torch::nn::Module& module, const std::filesystem::path& dir,
                     const nlohmann::json& config = nlohmann::json::object(),
                     const nlohmann::json& metadata = nlohmann::json::object());

// Reads and checks the manifest only.
nlohmann::json read_manifest(const std::filesystem::path& dir);

Checkpoint load_checkpoint(const std::filesystem::path& dir);

// Copies every tensor of `state` into the module's parameter or buffer of the
// same name. Missing names and shape differences throw.
void load_state(torch::nn::Module& module, const std::map<std::string, torch::Tensor>& state);

}  // namespace flowgate::train
