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

// Collapse diagnostics for embedding batches.

#pragma once

#include <torch/types.h>

#include <cstdint>

namespace flowgate::vicreg {

struct CollapseDiagnostics {
  // Per-dimension batch standard deviation (unbiased) summary.
  double std_min = 0.0;
  double std_max = 0.0;
  double std_mean = 0.0;
  double std_p10 = 0.0;
  double std_p50 = 0.0;
  double std_p90 = 0.0;
  double mean_abs_offdiag_cov = 0.0;
  std::int64_t rank = 0;  // numerical rank of the centered batch
};

CollapseDiagnostics collapse_diagnostics(const torch::Tensor& z);

// Counts consecutive intervals whose mean per-dimension std falls below the
// threshold; fires once the count reaches `patience`.
class CollapseMonitor {
 public:
  explicit CollapseMonitor(double threshold = 0.01, int patience = 3)
      : threshold_(threshold), patience_(patience) {}

  // True when this observation completes a run of `patience` low intervals.
  bool observe(double mean_std);
  bool fired() const { return fired_; }
  int streak() const { return streak_; }

 private:
  double threshold_;
  int patience_;
  int streak_ = 0;
  bool fired_ = false;
};

}  // namespace flowgate::vicreg
