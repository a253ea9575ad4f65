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

#include "flowgate/train/schedule.hpp"

#include <torch/torch.h>

#include <cmath>
#include <numbers>

#include "flowgate/error.hpp"

namespace flowgate::train {
namespace {

bool is_decayed(const std::string& name, const torch::Tensor& p) {
  const auto dot = name.rfind('.');
  const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
  // Batch-norm weights are 1-d, conv and linear weights are not.
  return leaf == "weight" && p.dim() >= 2;
}

}  // namespace

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::Bce: return "bce";
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::Vicreg: return "vicreg";
  }
  return "bce";
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "bce") return LossKind::Bce;
  if (s == "cross_entropy") return LossKind::CrossEntropy;
  if (s == "vicreg") return LossKind::Vicreg;
  fail(ErrorCode::BadConfig, "unknown loss '" + s + "'");
}

std::string to_string(Precision p) { return p == Precision::Full ? "full" : "mixed"; }

Precision precision_from_string(const std::string& s) {
  if (s == "full") return Precision::Full;
  if (s == "mixed") return Precision::Mixed;
  fail(ErrorCode::BadConfig, "unknown precision '" + s + "'");
}

void TrainConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::BadConfig, m); };
  if (batch_size < 1) bad("train.batch_size must be positive");
  if (epochs < 1) bad("train.epochs must be positive");
  if (patience < 1 || patience > epochs) bad("train.patience must lie in [1, epochs]");
  if (!(eta_min > 0.0 && lr > eta_min)) bad("train.lr must exceed train.eta_min > 0");
  if (momentum < 0.0 || momentum >= 1.0) bad("train.momentum must lie in [0, 1)");
  if (weight_decay < 0.0) bad("train.weight_decay must be non-negative");
  if (t_max < 1) bad("train.t_max must be positive");
}

double cosine_lr(double t, const TrainConfig& cfg) {
  if (!(t >= 0.0 && t <= static_cast<double>(cfg.t_max))) {
    fail(ErrorCode::OutOfRange, "epoch " + std::to_string(t) + " outside [0, " +
                                    std::to_string(cfg.t_max) + "]");
  }
  // (1 + cos x) / 2 written as the sine of the complementary half-angle form,
  // evaluated in extended precision so the endpoints and midpoint are exact.
  using L = long double;
  const L lo = cfg.eta_min, hi = cfg.lr, T = static_cast<L>(cfg.t_max);
  const L phase = std::numbers::pi_v<L> * (T - 2.0L * static_cast<L>(t)) / (2.0L * T);
  return static_cast<double>((hi + lo) / 2.0L + (hi - lo) / 2.0L * std::sin(phase));
}

std::vector<std::string> decayed_parameters(const torch::nn::Module& module) {
  std::vector<std::string> out;
  for (const auto& p : module.named_parameters()) {
    if (is_decayed(p.key(), p.value())) out.push_back(p.key());
  }
  return out;
}

std::vector<std::string> undecayed_parameters(const torch::nn::Module& module) {
  std::vector<std::string> out;
  for (const auto& p : module.named_parameters()) {
    if (!is_decayed(p.key(), p.value())) out.push_back(p.key());
  }
  return out;
}

std::unique_ptr<torch::optim::SGD> make_sgd(torch::nn::Module& module, const TrainConfig& cfg) {
  std::vector<torch::Tensor> decay, no_decay;
  for (auto& p : module.named_parameters()) {
    (is_decayed(p.key(), p.value()) ? decay : no_decay).push_back(p.value());
  }
  auto opts = [&](double wd) {
    return std::make_unique<torch::optim::SGDOptions>(
        torch::optim::SGDOptions(cfg.lr).momentum(cfg.momentum).weight_decay(wd));
  };
  std::vector<torch::optim::OptimizerParamGroup> groups;
  groups.emplace_back(decay, opts(cfg.weight_decay));
  groups.emplace_back(no_decay, opts(0.0));
  return std::make_unique<torch::optim::SGD>(groups, torch::optim::SGDOptions(cfg.lr));
}

void set_learning_rate(torch::optim::Optimizer& opt, double lr) {
  for (auto& g : opt.param_groups()) {
    static_cast<torch::optim::SGDOptions&>(g.options()).lr(lr);
  }
}

bool EarlyStopping::observe(std::int64_t epoch, double value) {
  if (value < best_) {
    best_ = value;
    best_epoch_ = epoch;
    bad_epochs_ = 0;
    return true;
  }
  ++bad_epochs_;
  return false;
}

}  // namespace flowgate::train
