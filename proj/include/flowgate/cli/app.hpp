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

// Command-line entry point.
//
//   flowgate <command> [--config FILE] [--out DIR] [--set key=value]...
//
// Commands: synth-data, preprocess, pretrain, train, finetune, eval, count,
// report. Exit status is 0 on success, 1 for invalid usage or configuration
// and 2 for failures while running.

#pragma once

#include <string>
#include <vector>

namespace flowgate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitRuntime = 2;

int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace flowgate::cli
