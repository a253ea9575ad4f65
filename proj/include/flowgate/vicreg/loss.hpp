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

// Variance-invariance-covariance loss on two embedding batches of shape n x d.
//
//   s(Z, Z')  = (1/n) sum_i |z_i - z'_i|^2
//   v(Z)      = (1/d) sum_j max(0, gamma - sqrt(Var_j(Z) + eps))
//   c(Z)      = (1/d) sum_{i != j} C_ij^2,  C = Zc^T Zc / (n - 1)
//   L         = lambda s + mu (v(Z) + v(Z')) + nu (c(Z) + c(Z'))
//
// Variances use the unbiased n - 1 divisor. Terms are evaluated in double
// precision and stay differentiable with respect to both inputs.

#pragma once

#include <torch/types.h>

namespace flowgate::vicreg {

struct VicregWeights {
  double lambda = 25.0;
  double mu = 25.0;
  double nu = 1.0;
  double gamma = 1.0;
  double eps = 1e-4;

  void validate() const;
};

struct LossBreakdown {
  double invariance = 0.0;  // s
  double variance = 0.0;    // v(Z) + v(Z')
  double covariance = 0.0;  // c(Z) + c(Z')
  double total = 0.0;
  double variance_a = 0.0, variance_b = 0.0;
  double covariance_a = 0.0, covariance_b = 0.0;
  torch::Tensor total_tensor;  // 0-dim, carries the autograd graph
};

torch::Tensor variance_term(const torch::Tensor& z, const VicregWeights& w = {});
torch::Tensor invariance_term(const torch::Tensor& z, const torch::Tensor& z_prime);
torch::Tensor covariance_term(const torch::Tensor& z);

LossBreakdown vicreg_loss(const torch::Tensor& z, const torch::Tensor& z_prime,
                          const VicregWeights& w = {});

}  // namespace flowgate::vicreg
