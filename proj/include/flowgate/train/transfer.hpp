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

// Weight transfer from a pretrained checkpoint into a fresh network.

#pragma once

#include <set>
#include <string>
#include <vector>

#include "flowgate/model/fgn.hpp"
#include "flowgate/train/checkpoint.hpp"

namespace flowgate::train {

struct TransferPolicy {
  std::set<std::string> include{"rgb", "flow"};  // subset of {rgb, flow, merge}
  bool strict_names = true;

  void validate() const;
};

struct TransferReport {
  std::vector<std::string> copied;   // target tensor names overwritten
  std::vector<std::string> skipped;  // target tensor names left at initialization
};

// Every check runs before the first copy, so a failure leaves `target`
// untouched. Expander tensors are never transferred.
TransferReport transfer_weights(model::FgnModelImpl& target, const Checkpoint& ckpt,
                                const TransferPolicy& policy);

}  // namespace flowgate::train
