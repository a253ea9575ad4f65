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

#include "flowgate/vicreg/loss.hpp"

#include <torch/torch.h>

#include <string>

#include "flowgate/error.hpp"

namespace flowgate::vicreg {
namespace {

// Above this width the covariance penalty is computed through the n x n Gram
// matrix instead of the d x d covariance.
constexpr std::int64_t kGramWidth = 2048;

torch::Tensor as_batch(const torch::Tensor& z, const char* what) {
  if (z.dim() != 2) {
    fail(ErrorCode::ShapeMismatch, std::string(what) + " must be an n x d matrix");
  }
  if (z.size(0) < 2) {
    fail(ErrorCode::BatchTooSmall,
         std::string(what) + " needs at least 2 rows, got " + std::to_string(z.size(0)));
  }
  return z.to(torch::kFloat64);
}

}  // namespace

void VicregWeights::validate() const {
  if (!(lambda >= 0.0 && mu >= 0.0 && nu >= 0.0 && gamma > 0.0 && eps > 0.0)) {
    fail(ErrorCode::BadConfig, "vicreg weights must be non-negative and gamma, eps positive");
  }
}

torch::Tensor variance_term(const torch::Tensor& z, const VicregWeights& w) {
  auto x = as_batch(z, "Z");
  auto std = torch::sqrt(x.var(0, /*unbiased=*/true) + w.eps);
  return torch::relu(w.gamma - std).mean();
}

torch::Tensor invariance_term(const torch::Tensor& z, const torch::Tensor& z_prime) {
  if (z.dim() != 2 || z.sizes() != z_prime.sizes()) {
    fail(ErrorCode::ShapeMismatch, "Z and Z' must be n x d matrices of equal shape");
  }
  if (z.size(0) < 1) fail(ErrorCode::BatchTooSmall, "empty embedding batch");
  auto diff = z.to(torch::kFloat64) - z_prime.to(torch::kFloat64);
  return diff.pow(2).sum(1).mean();
}

torch::Tensor covariance_term(const torch::Tensor& z) {
  auto x = as_batch(z, "Z");
  const auto n = x.size(0);
  const auto d = x.size(1);
  auto xc = x - x.mean(0, true);
  if (d <= kGramWidth || d <= n) {
    auto cov = xc.t().mm(xc) / static_cast<double>(n - 1);
    auto off = cov - torch::diag(torch::diagonal(cov));
    return off.pow(2).sum() / static_cast<double>(d);
  }
  // sum_{i != j} C_ij^2 = |Xc Xc^T|_F^2 - sum_j (Xc^T Xc)_jj^2, scaled by 1/(n-1)^2.
  auto gram = xc.mm(xc.t());
  auto diag = xc.pow(2).sum(0);
  auto off = gram.pow(2).sum() - diag.pow(2).sum();
  return torch::clamp_min(off, 0.0) / (static_cast<double>(n - 1) * (n - 1) * d);
}

LossBreakdown vicreg_loss(const torch::Tensor& z, const torch::Tensor& z_prime,
                          const VicregWeights& w) {
  w.validate();
  auto s = invariance_term(z, z_prime);
  auto va = variance_term(z, w);
  auto vb = variance_term(z_prime, w);
  auto ca = covariance_term(z);
  auto cb = covariance_term(z_prime);
  auto total = w.lambda * s + w.mu * (va + vb) + w.nu * (ca + cb);

  LossBreakdown out;
  out.invariance = s.item<double>();
  out.variance_a = va.item<double>();
  out.variance_b = vb.item<double>();
  out.covariance_a = ca.item<double>();
  out.covariance_b = cb.item<double>();
  out.variance = out.variance_a + out.variance_b;
  out.covariance = out.covariance_a + out.covariance_b;
  out.total = total.item<double>();
  out.total_tensor = total;
  return out;
}

}  // namespace flowgate::vicreg
