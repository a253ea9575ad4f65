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

// Finite-difference check of the loss gradient. The numeric side
// differentiates the independent oracle, the analytic side is autograd through
// the library loss.

#pragma once

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "flowgate/vicreg/loss.hpp"
#include "oracles.hpp"

namespace oracle {

struct GradCheck {
  double worst_rel = 0.0;
  int coordinates = 0;
};

inline GradCheck vicreg_gradcheck(const torch::Tensor& z, const torch::Tensor& zp,
                                  std::mt19937_64& gen, int coords = 20, double step = 1e-3) {
  const flowgate::vicreg::VicregWeights w;
  auto a = z.to(torch::kFloat64).detach().clone().requires_grad_(true);
  auto b = zp.to(torch::kFloat64).detach().clone().requires_grad_(true);
  flowgate::vicreg::vicreg_loss(a, b, w).total_tensor.backward();
  const auto ga = a.grad().contiguous();
  const auto gb = b.grad().contiguous();

  Matrix ma = from_tensor(z), mb = from_tensor(zp);
  const std::size_t n = ma.size(), d = ma[0].size();
  std::uniform_int_distribution<std::size_t> pick(0, 2 * n * d - 1);
  GradCheck out;
  for (int k = 0; k < coords; ++k) {
    const std::size_t idx = pick(gen);
    const bool second = idx >= n * d;
    const std::size_t flat = idx % (n * d), i = flat / d, j = flat % d;
    Matrix& m = second ? mb : ma;
    const double keep = m[i][j];
    m[i][j] = keep + step;
    const double up = vicreg_total(ma, mb, w.lambda, w.mu, w.nu, w.gamma, w.eps);
    m[i][j] = keep - step;
    const double down = vicreg_total(ma, mb, w.lambda, w.mu, w.nu, w.gamma, w.eps);
    m[i][j] = keep;
    const double numeric = (up - down) / (2 * step);
    const double analytic =
        (second ? gb : ga).view({-1})[static_cast<std::int64_t>(flat)].item<double>();
    const double scale = std::max({std::fabs(numeric), std::fabs(analytic), 1e-8});
    out.worst_rel = std::max(out.worst_rel, std::fabs(numeric - analytic) / scale);
    ++out.coordinates;
  }
  return out;
}

// Random batch standardized as a whole: zero mean, unit variance overall.
inline torch::Tensor standardized_batch(std::int64_t n, std::int64_t d) {
  auto z = torch::randn({n, d}, torch::kFloat64);
  return (z - z.mean()) / z.std();
}

}  // namespace oracle
