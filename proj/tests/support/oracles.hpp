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

// Independent reference implementations used as test oracles. They work on
// plain nested vectors with long double accumulation and share no code with
// the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <torch/torch.h>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix from_tensor(const torch::Tensor& t) {
  auto c = t.to(torch::kFloat64).contiguous();
  Matrix m(c.size(0), std::vector<double>(c.size(1)));
  for (std::int64_t i = 0; i < c.size(0); ++i) {
    for (std::int64_t j = 0; j < c.size(1); ++j) m[i][j] = c[i][j].item<double>();
  }
  return m;
}

inline long double column_mean(const Matrix& z, std::size_t j) {
  long double s = 0;
  for (const auto& row : z) s += row[j];
  return s / static_cast<long double>(z.size());
}

inline double invariance(const Matrix& a, const Matrix& b) {
  long double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      const long double d = static_cast<long double>(a[i][j]) - b[i][j];
      total += d * d;
    }
  }
  return static_cast<double>(total / static_cast<long double>(a.size()));
}

inline double variance(const Matrix& z, double gamma, double eps) {
  const std::size_t n = z.size(), d = z[0].size();
  long double total = 0;
  for (std::size_t j = 0; j < d; ++j) {
    const long double mean = column_mean(z, j);
    long double ss = 0;
    for (std::size_t i = 0; i < n; ++i) ss += (z[i][j] - mean) * (z[i][j] - mean);
    const long double sd = std::sqrt(ss / static_cast<long double>(n - 1) + eps);
    total += std::max<long double>(0, gamma - sd);
  }
  return static_cast<double>(total / static_cast<long double>(d));
}

inline double covariance(const Matrix& z) {
  const std::size_t n = z.size(), d = z[0].size();
  std::vector<long double> mean(d);
  for (std::size_t j = 0; j < d; ++j) mean[j] = column_mean(z, j);
  long double total = 0;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      if (a == b) continue;
      long double c = 0;
      for (std::size_t i = 0; i < n; ++i) c += (z[i][a] - mean[a]) * (z[i][b] - mean[b]);
      c /= static_cast<long double>(n - 1);
      total += c * c;
    }
  }
  return static_cast<double>(total / static_cast<long double>(d));
}

inline double vicreg_total(const Matrix& a, const Matrix& b, double lambda, double mu, double nu,
                           double gamma, double eps) {
  return lambda * invariance(a, b) + mu * (variance(a, gamma, eps) + variance(b, gamma, eps)) +
         nu * (covariance(a) + covariance(b));
}

// Fraction of (positive, negative) pairs ranked correctly, ties one half.
inline double pairwise_auc(const std::vector<std::int64_t>& labels,
                           const std::vector<double>& scores) {
  std::int64_t twice = 0, pairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j]) twice += 2;
      else if (scores[i] == scores[j]) twice += 1;
    }
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pairs));
}

// Keys cubic convolution kernel with a = -0.75.
inline double cubic(double x) {
  const double a = -0.75;
  x = std::fabs(x);
  if (x <= 1) return ((a + 2) * x - (a + 3)) * x * x + 1;
  if (x < 2) return ((a * x - 5 * a) * x + 8 * a) * x - 4 * a;
  return 0;
}

// Bicubic resize of one plane with half-pixel centers and replicated borders.
inline Matrix bicubic(const Matrix& src, std::size_t out_h, std::size_t out_w) {
  const long in_h = static_cast<long>(src.size()), in_w = static_cast<long>(src[0].size());
  const double sy = static_cast<double>(in_h) / static_cast<double>(out_h);
  const double sx = static_cast<double>(in_w) / static_cast<double>(out_w);
  auto at = [&](long y, long x) {
    y = std::clamp(y, 0L, in_h - 1);
    x = std::clamp(x, 0L, in_w - 1);
    return src[y][x];
  };
  Matrix out(out_h, std::vector<double>(out_w));
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
    const long y0 = static_cast<long>(std::floor(fy));
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
      const long x0 = static_cast<long>(std::floor(fx));
      double acc = 0;
      for (long dy = -1; dy <= 2; ++dy) {
        const double wy = cubic(fy - static_cast<double>(y0 + dy));
        for (long dx = -1; dx <= 2; ++dx) {
          acc += wy * cubic(fx - static_cast<double>(x0 + dx)) * at(y0 + dy, x0 + dx);
        }
      }
      out[oy][ox] = acc;
    }
  }
  return out;
}

// Nearest native frame for each target-rate timestamp k / target_fps, keeping
// samples whose whole target period [k, k + 1) / target_fps lies in the clip.
inline std::vector<std::int64_t> nearest_frames(std::int64_t native_count, double native_fps,
                                                double target_fps) {
  std::vector<std::int64_t> out;
  for (std::int64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) / target_fps;
    if (static_cast<double>(k + 1) / target_fps >
        static_cast<double>(native_count) / native_fps + 1e-12) {
      break;
    }
    std::int64_t best = 0;
    double best_d = 1e300;
    for (std::int64_t i = 0; i < native_count; ++i) {
      const double d = std::fabs(static_cast<double>(i) / native_fps - t);
      if (d < best_d - 1e-12) {
        best_d = d;
        best = i;
      }
    }
    out.push_back(best);
  }
  return out;
}

// Scratch directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("flowgate_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace oracle
