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

// Binary classification metrics, ROC analysis and report files.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

namespace flowgate::eval {

inline constexpr double kDefaultThreshold = 0.5;

struct ConfusionMatrix {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // +inf for the origin, -inf for the (1, 1) endpoint
};

struct MetricsReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double tnr = 0.0;  // NaN without negatives
  double tpr = 0.0;  // NaN without positives
  std::optional<double> auc;  // empty when only one class is present
  double threshold = kDefaultThreshold;
  ConfusionMatrix confusion;
  std::vector<RocPoint> roc;

  nlohmann::json to_json() const;
};

// Positive prediction when score >= threshold.
ConfusionMatrix confusion(const std::vector<std::int64_t>& labels, const std::vector<double>& scores,
                          double threshold = kDefaultThreshold);

// Probability that a random positive outranks a random negative, ties
// counting one half.
double auc(const std::vector<std::int64_t>& labels, const std::vector<double>& scores);

// (0, 0), one point per distinct score taken as threshold in decreasing
// order, then (1, 1).
std::vector<RocPoint> roc_curve(const std::vector<std::int64_t>& labels,
                                const std::vector<double>& scores);

MetricsReport metrics(const ConfusionMatrix& cm, const std::vector<std::int64_t>& labels,
                      const std::vector<double>& scores, double threshold = kDefaultThreshold);

// Fraction of rows whose label is among the k highest-probability classes.
double top_k_accuracy(const std::vector<std::vector<double>>& probs,
                      const std::vector<std::int64_t>& labels, std::int64_t k);

// metrics.json, roc.csv, roc.png and confusion.png; overwrites existing files.
void emit_report(const MetricsReport& report, const std::filesystem::path& dir);

}  // namespace flowgate::eval
