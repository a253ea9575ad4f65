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

#include "flowgate/train/checkpoint.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "flowgate/data/tensor_io.hpp"
#include "flowgate/error.hpp"
#include "flowgate/model/fgn.hpp"

namespace flowgate::train {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::int64_t> shape_of(const torch::Tensor& t) {
  return std::vector<std::int64_t>(t.sizes().begin(), t.sizes().end());
}

void corrupt(const fs::path& dir, const std::string& why) {
  fail(ErrorCode::CorruptManifest, (dir / "manifest.json").string() + ": " + why);
}

}  // namespace

bool Checkpoint::has_group(const std::string& g) const {
  return std::find(groups.begin(), groups.end(), g) != groups.end();
}

std::map<std::string, torch::Tensor> module_state(const torch::nn::Module& module) {
  std::map<std::string, torch::Tensor> out;
  for (const auto& p : module.named_parameters()) out[p.key()] = p.value().detach().clone();
  for (const auto& b : module.named_buffers()) out[b.key()] = b.value().detach().clone();
  return out;
}

void save_checkpoint(const torch::nn::Module& module, const fs::path& dir, const json& config,
                     const json& metadata) {
  const auto state = module_state(module);
  std::set<std::string> groups;
  json tensors = json::object();
  const fs::path tmp = dir.string() + ".tmp";
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);
  for (const auto& [name, t] : state) {
    const std::string file = name + ".jt";
    data::write_tensor(tmp / file, t.to(torch::kFloat32));
    tensors[name] = {{"file", file}, {"shape", shape_of(t)}, {"dtype", c10::toString(t.scalar_type())}};
    const auto g = model::parameter_group(name);
    if (!g.empty()) groups.insert(g);
  }
  json manifest = {{"format_version", kCheckpointVersion},
                   {"config", config},
                   {"groups", std::vector<std::string>(groups.begin(), groups.end())},
                   {"tensor_count", state.size()},
                   {"tensors", tensors},
                   {"metadata", metadata}};
  {
    std::ofstream out(tmp / "manifest.json");
    out << manifest.dump(2) << '\n';
    if (!out) fail(ErrorCode::IoError, "cannot write " + (tmp / "manifest.json").string());
  }
  fs::remove_all(dir, ec);
  fs::rename(tmp, dir);
}

json read_manifest(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) fail(ErrorCode::IoError, "cannot open " + (dir / "manifest.json").string());
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    corrupt(dir, std::string("invalid JSON: ") + e.what());
  }
  if (!m.is_object()) corrupt(dir, "not an object");
  if (!m.contains("format_version") || !m["format_version"].is_number_integer()) {
    corrupt(dir, "missing format_version");
  }
  const int version = m["format_version"].get<int>();
  if (version != kCheckpointVersion) {
    fail(ErrorCode::UnsupportedVersion,
         "checkpoint format_version " + std::to_string(version) + " is not supported");
  }
  for (const char* key : {"tensors", "groups", "tensor_count"}) {
    if (!m.contains(key)) corrupt(dir, std::string("missing '") + key + "'");
  }
  if (!m["tensors"].is_object() || !m["groups"].is_array() ||
      !m["tensor_count"].is_number_integer()) {
    corrupt(dir, "wrong field types");
  }
  for (const auto& [name, entry] : m["tensors"].items()) {
    if (!entry.is_object() || !entry.contains("file") || !entry["file"].is_string() ||
        !entry.contains("shape") || !entry["shape"].is_array()) {
      corrupt(dir, "bad entry for tensor '" + name + "'");
    }
  }
  const auto count = m["tensor_count"].get<std::int64_t>();
  if (count != static_cast<std::int64_t>(m["tensors"].size())) {
    fail(ErrorCode::TensorCountMismatch, "manifest declares " + std::to_string(count) +
                                             " tensors but lists " +
                                             std::to_string(m["tensors"].size()));
  }
  return m;
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const json m = read_manifest(dir);
  Checkpoint ck;
  ck.format_version = m["format_version"].get<int>();
  ck.config = m.value("config", json::object());
  ck.metadata = m.value("metadata", json::object());
  ck.groups = m["groups"].get<std::vector<std::string>>();
  for (const auto& [name, entry] : m["tensors"].items()) {
    const fs::path file = dir / entry["file"].get<std::string>();
    if (!fs::exists(file)) {
      fail(ErrorCode::TensorCountMismatch, "tensor '" + name + "' has no file " + file.string());
    }
    torch::Tensor t;
    try {
      t = data::read_tensor(file);
    } catch (const Error& e) {
      throw Error(e.code(), "tensor '" + name + "': " + e.what());
    }
    const auto shape = entry["shape"].get<std::vector<std::int64_t>>();
    if (t.sizes() != c10::IntArrayRef(shape)) {
      fail(ErrorCode::ShapeMismatch, "tensor '" + name + "' shape differs from manifest");
    }
    if (entry.contains("dtype") && entry["dtype"] == "Long") t = t.to(torch::kInt64);
    ck.tensors[name] = t;
  }
  return ck;
}

void load_state(torch::nn::Module& module, const std::map<std::string, torch::Tensor>& state) {
  torch::NoGradGuard no_grad;
  auto params = module.named_parameters();
  auto buffers = module.named_buffers();
  for (const auto& [name, src] : state) {
    torch::Tensor* dst = params.find(name);
    if (!dst) dst = buffers.find(name);
    if (!dst) fail(ErrorCode::MissingGroup, "module has no tensor named '" + name + "'");
    if (dst->sizes() != src.sizes()) {
      fail(ErrorCode::ShapeMismatch, "tensor '" + name + "' shape mismatch");
    }
    dst->copy_(src);
  }
}

}  // namespace flowgate::train
