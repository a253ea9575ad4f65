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

#include "flowgate/train/transfer.hpp"

#include <torch/torch.h>

#include "flowgate/error.hpp"

namespace flowgate::train {

void TransferPolicy::validate() const {
  if (include.empty()) fail(ErrorCode::BadConfig, "transfer policy must include a group");
  for (const auto& g : include) {
    if (g != "rgb" && g != "flow" && g != "merge") {
      fail(ErrorCode::BadConfig, "cannot transfer group '" + g + "'");
    }
  }
}

TransferReport transfer_weights(model::FgnModelImpl& target, const Checkpoint& ckpt,
                                const TransferPolicy& policy) {
  policy.validate();
  for (const auto& g : policy.include) {
    if (!ckpt.has_group(g) && policy.strict_names) {
      fail(ErrorCode::MissingGroup, "checkpoint has no '" + g + "' group");
    }
  }

  std::vector<std::pair<torch::Tensor, torch::Tensor>> copies;
  TransferReport report;
  auto plan = [&](const std::string& name, const torch::Tensor& dst) {
    const auto group = model::parameter_group(name);
    if (!policy.include.count(group)) {
      report.skipped.push_back(name);
      return;
    }
    auto it = ckpt.tensors.find(name);
    if (it == ckpt.tensors.end()) {
      if (policy.strict_names) {
        fail(ErrorCode::MissingGroup, "checkpoint lacks tensor '" + name + "'");
      }
      report.skipped.push_back(name);
      return;
    }
    if (it->second.sizes() != dst.sizes()) {
      fail(ErrorCode::ShapeMismatch, "tensor '" + name + "' has a different shape in the checkpoint");
    }
    copies.emplace_back(dst, it->second);
    report.copied.push_back(name);
  };
  for (const auto& p : target.named_parameters()) plan(p.key(), p.value());
  for (const auto& b : target.named_buffers()) plan(b.key(), b.value());

  torch::NoGradGuard no_grad;
  for (auto& [dst, src] : copies) dst.copy_(src);
  return report;
}

}  // namespace flowgate::train
