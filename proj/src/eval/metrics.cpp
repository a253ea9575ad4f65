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

#include "flowgate/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "flowgate/error.hpp"

namespace flowgate::eval {
namespace {

using json = nlohmann::json;

void check_inputs(const std::vector<std::int64_t>& labels, const std::vector<double>& scores) {
  if (labels.size() != scores.size()) {
    fail(ErrorCode::LengthMismatch, std::to_string(labels.size()) + " labels but " +
                                        std::to_string(scores.size()) + " scores");
  }
  if (labels.empty()) fail(ErrorCode::EmptyInput, "no samples");
  for (auto l : labels) {
    if (l != 0 && l != 1) fail(ErrorCode::OutOfRange, "labels must be 0 or 1");
  }
  for (auto s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) fail(ErrorCode::OutOfRange, "scores must lie in [0, 1]");
  }
}

// Indices sorted by decreasing score.
std::vector<std::size_t> by_score_desc(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return idx;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ConfusionMatrix confusion(const std::vector<std::int64_t>& labels, const std::vector<double>& scores,
                          double threshold) {
  check_inputs(labels, scores);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    if (labels[i] == 1) (pred ? cm.tp : cm.fn)++;
    else (pred ? cm.fp : cm.tn)++;
  }
  return cm;
}

double auc(const std::vector<std::int64_t>& labels, const std::vector<double>& scores) {
  check_inputs(labels, scores);
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  const auto neg = static_cast<std::int64_t>(labels.size()) - pos;
  if (pos == 0 || neg == 0) fail(ErrorCode::SingleClass, "AUC needs both classes");

  // Walk tie groups from the lowest score up; twice the pair count stays an
  // integer, so the result is exact up to the final division.
  std::vector<std::size_t> idx = by_score_desc(scores);
  std::reverse(idx.begin(), idx.end());
  std::int64_t twice = 0, neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::int64_t gp = 0, gn = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      (labels[idx[j]] == 1 ? gp : gn)++;
      ++j;
    }
    twice += 2 * gp * neg_below + gp * gn;
    neg_below += gn;
    i = j;
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

std::vector<RocPoint> roc_curve(const std::vector<std::int64_t>& labels,
                                const std::vector<double>& scores) {
  check_inputs(labels, scores);
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  const auto neg = static_cast<std::int64_t>(labels.size()) - pos;
  auto rate = [](std::int64_t k, std::int64_t total) {
    return total > 0 ? static_cast<double>(k) / static_cast<double>(total) : 0.0;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<RocPoint> out{{0.0, 0.0, inf}};
  const auto idx = by_score_desc(scores);
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const double t = scores[idx[i]];
    while (i < idx.size() && scores[idx[i]] == t) {
      (labels[idx[i]] == 1 ? tp : fp)++;
      ++i;
    }
    out.push_back({rate(fp, neg), rate(tp, pos), t});
  }
  out.push_back({1.0, 1.0, -inf});
  return out;
}

MetricsReport metrics(const ConfusionMatrix& cm, const std::vector<std::int64_t>& labels,
                      const std::vector<double>& scores, double threshold) {
  check_inputs(labels, scores);
  if (cm.total() != static_cast<std::int64_t>(labels.size())) {
    fail(ErrorCode::LengthMismatch, "confusion matrix does not cover every sample");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  MetricsReport r;
  r.confusion = cm;
  r.threshold = threshold;
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  const auto f1_den = 2 * cm.tp + cm.fp + cm.fn;
  r.f1 = f1_den > 0 ? 2.0 * static_cast<double>(cm.tp) / static_cast<double>(f1_den) : nan;
  r.tnr = cm.tn + cm.fp > 0 ? static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp) : nan;
  r.tpr = cm.tp + cm.fn > 0 ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn) : nan;
  if (cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0) r.auc = auc(labels, scores);
  r.roc = roc_curve(labels, scores);
  return r;
}

double top_k_accuracy(const std::vector<std::vector<double>>& probs,
                      const std::vector<std::int64_t>& labels, std::int64_t k) {
  if (probs.size() != labels.size()) fail(ErrorCode::LengthMismatch, "rows and labels differ");
  if (probs.empty()) fail(ErrorCode::EmptyInput, "no samples");
  if (k < 1) fail(ErrorCode::OutOfRange, "k must be positive");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& row = probs[i];
    const auto label = labels[i];
    if (label < 0 || label >= static_cast<std::int64_t>(row.size())) {
      fail(ErrorCode::OutOfRange, "label outside the class range");
    }
    // Rank of the true class; ties resolved in favour of lower class ids.
    std::int64_t above = 0;
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(row.size()); ++c) {
      if (row[c] > row[label] || (row[c] == row[label] && c < label)) ++above;
    }
    hit += above < k;
  }
  return static_cast<double>(hit) / static_cast<double>(probs.size());
}

json MetricsReport::to_json() const {
  return {{"accuracy", number_or_null(accuracy)},
          {"f1", number_or_null(f1)},
          {"tnr", number_or_null(tnr)},
          {"tpr", number_or_null(tpr)},
          {"auc", auc ? json(*auc) : json(nullptr)},
          {"threshold", threshold},
          {"tp", confusion.tp},
          {"fp", confusion.fp},
          {"tn", confusion.tn},
          {"fn", confusion.fn},
          {"n", confusion.total()},
          {"roc_points", roc.size()}};
}

}  // namespace flowgate::eval
