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

#include "flowgate/vicreg/diagnostics.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "flowgate/error.hpp"

namespace flowgate::vicreg {
namespace {

constexpr std::int64_t kChunk = 1024;

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

CollapseDiagnostics collapse_diagnostics(const torch::Tensor& z) {
  if (z.dim() != 2) fail(ErrorCode::ShapeMismatch, "diagnostics expect an n x d matrix");
  if (z.size(0) < 2) fail(ErrorCode::BatchTooSmall, "diagnostics need at least 2 rows");
  torch::NoGradGuard no_grad;
  auto x = z.detach().to(torch::kFloat64).contiguous();
  const auto n = x.size(0);
  const auto d = x.size(1);
  auto xc = x - x.mean(0, true);

  auto stds = x.std(0, /*unbiased=*/true).contiguous();
  std::vector<double> s(stds.data_ptr<double>(), stds.data_ptr<double>() + d);
  std::sort(s.begin(), s.end());
  CollapseDiagnostics out;
  out.std_min = s.front();
  out.std_max = s.back();
  out.std_mean = stds.mean().item<double>();
  out.std_p10 = quantile(s, 0.1);
  out.std_p50 = quantile(s, 0.5);
  out.std_p90 = quantile(s, 0.9);

  // Row blocks of the d x d covariance, so wide embeddings stay in memory.
  double abs_sum = 0.0;
  for (std::int64_t r = 0; r < d; r += kChunk) {
    const auto len = std::min(kChunk, d - r);
    auto block = xc.narrow(1, r, len).t().mm(xc) / static_cast<double>(n - 1);
    auto diag = block.narrow(1, r, len).diagonal().abs().sum();
    abs_sum += (block.abs().sum() - diag).item<double>();
  }
  out.mean_abs_offdiag_cov = d > 1 ? abs_sum / static_cast<double>(d * (d - 1)) : 0.0;

  auto sv = torch::linalg_svdvals(xc);
  const double smax = sv.numel() ? sv.max().item<double>() : 0.0;
  // Centering leaves rounding residue of order eps * |x|, so the cutoff scales
  // with the uncentered magnitude as well. eps is that of the input dtype.
  const double scale = std::max(smax, x.norm().item<double>());
  const double eps = z.scalar_type() == torch::kFloat64
                         ? std::numeric_limits<double>::epsilon()
                         : static_cast<double>(std::numeric_limits<float>::epsilon());
  if (smax > 0.0) {
    const double tol = scale * static_cast<double>(std::max(n, d)) * eps;
    out.rank = (sv > tol).sum().item<std::int64_t>();
  }
  return out;
}

bool CollapseMonitor::observe(double mean_std) {
  streak_ = mean_std < threshold_ ? streak_ + 1 : 0;
  if (streak_ >= patience_ && !fired_) {
    fired_ = true;
    return true;
  }
  return false;
}

}  // namespace flowgate::vicreg
