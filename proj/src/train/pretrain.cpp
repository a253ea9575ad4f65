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

#include "flowgate/train/pretrain.hpp"

#include <torch/torch.h>

#include <cmath>
#include <numeric>

#include "flowgate/error.hpp"
#include "flowgate/log.hpp"
#include "flowgate/rng.hpp"

namespace flowgate::train {
namespace {

using json = nlohmann::json;

constexpr std::uint64_t kShuffleTag = 0x5353;
constexpr std::uint64_t kViewTag = 0x5356;
constexpr std::uint64_t kDropoutTag = 0x5344;

json diag_json(const vicreg::CollapseDiagnostics& d) {
  return {{"std_min", d.std_min},   {"std_max", d.std_max}, {"std_mean", d.std_mean},
          {"std_p10", d.std_p10},   {"std_p50", d.std_p50}, {"std_p90", d.std_p90},
          {"mean_abs_offdiag_cov", d.mean_abs_offdiag_cov}, {"rank", d.rank}};
}

}  // namespace

void PretrainConfig::validate() const {
  train.validate();
  weights.validate();
  if (train.batch_size < 2) fail(ErrorCode::BadConfig, "pretraining needs batch_size >= 2");
  if (iterations < 0) fail(ErrorCode::BadConfig, "vicreg.iterations must be non-negative");
  if (log_interval < 1) fail(ErrorCode::BadConfig, "vicreg.log_interval must be positive");
  if (collapse_patience < 1) fail(ErrorCode::BadConfig, "collapse patience must be positive");
  if (!(max_grad_norm >= 0.0)) fail(ErrorCode::BadConfig, "vicreg.max_grad_norm must be >= 0");
}

namespace {

// Global L2 norm of the gradients; rescales them to `clip` when it is exceeded.
double gradient_norm(torch::nn::Module& model, double clip) {
  std::vector<torch::Tensor> grads;
  for (auto& p : model.parameters()) {
    if (p.grad().defined()) grads.push_back(p.grad());
  }
  if (grads.empty()) return 0.0;
  double sq = 0.0;
  for (const auto& g : grads) sq += g.to(torch::kFloat64).pow(2).sum().item<double>();
  const double norm = std::sqrt(sq);
  if (clip > 0.0 && norm > clip) {
    const double scale = clip / norm;
    for (auto& g : grads) g.mul_(scale);
  }
  return norm;
}

}  // namespace

json PretrainLogEntry::to_json() const {
  return {{"iteration", iteration},
          {"epoch", epoch},
          {"lr", lr},
          {"grad_norm", grad_norm},
          {"loss", loss.total},
          {"invariance", loss.invariance},
          {"variance", loss.variance},
          {"covariance", loss.covariance},
          {"z", diag_json(z)},
          {"z_prime", diag_json(z_prime)}};
}

json PretrainResult::summary() const {
  return {{"iterations", iterations},
          {"first_loss", losses.empty() ? 0.0 : losses.front()},
          {"last_loss", losses.empty() ? 0.0 : losses.back()},
          {"collapse_detected", collapse_detected},
          {"stop_reason", stop_reason}};
}

PretrainResult pretrain_vicreg(vicreg::VicregModelImpl& model, const data::SegmentSource& unlabeled,
                               const PretrainConfig& cfg, const augment::AugmentConfig& aug,
                               const std::function<void(const PretrainLogEntry&)>& on_log) {
  cfg.validate();
  aug.validate();
  const auto& tc = cfg.train;
  if (unlabeled.size() < 2) {
    fail(ErrorCode::EmptyDataset, "pretraining needs at least 2 segments");
  }
  auto optimizer = make_sgd(model, tc);
  EarlyStopping stopper(tc.patience);
  vicreg::CollapseMonitor monitor(cfg.collapse_threshold, cfg.collapse_patience);
  PretrainResult result;
  result.stop_reason = "max_epochs";
  const auto n = unlabeled.size();
  const auto bs = static_cast<std::size_t>(tc.batch_size);

  for (std::int64_t epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = cosine_lr(static_cast<double>(std::min(epoch, tc.t_max)), tc);
    set_learning_rate(*optimizer, lr);
    torch::manual_seed(derive_seed(tc.seed, {kDropoutTag, static_cast<std::uint64_t>(epoch)}));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle(derive_seed(tc.seed, {kShuffleTag, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform_int(static_cast<std::int64_t>(i))]);
    }

    model.train();
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    for (std::size_t first = 0; first + 2 <= n; first += bs) {
      const auto count = std::min(bs, n - first);
      if (count < 2) break;
      std::vector<torch::Tensor> rgb, flow;
      for (std::size_t k = first; k < first + count; ++k) {
        Rng rng(derive_seed(tc.seed, {kViewTag, static_cast<std::uint64_t>(epoch), order[k]}));
        auto views = augment::make_ssl_views(unlabeled.get(order[k]), rng, aug);
        rgb.push_back(views.rgb);
        flow.push_back(views.flow);
      }
      auto [z, zp] = model.forward(torch::stack(rgb).to(torch::kFloat32),
                                   torch::stack(flow).to(torch::kFloat32));
      auto loss = vicreg::vicreg_loss(z, zp, cfg.weights);
      ++result.iterations;
      if (!std::isfinite(loss.total)) {
        log_event(LogLevel::Error, "nonfinite_loss",
                  {{"iteration", result.iterations}, {"epoch", epoch}});
        fail(ErrorCode::NonFiniteLoss,
             "non-finite vicreg loss at iteration " + std::to_string(result.iterations));
      }
      optimizer->zero_grad();
      loss.total_tensor.backward();
      const double grad_norm = gradient_norm(model, cfg.max_grad_norm);
      optimizer->step();
      result.losses.push_back(loss.total);
      epoch_loss += loss.total;
      ++epoch_steps;

      const bool last = cfg.iterations > 0 && result.iterations >= cfg.iterations;
      if (result.iterations % cfg.log_interval == 0 || result.iterations == 1 || last) {
        PretrainLogEntry entry;
        entry.iteration = result.iterations;
        entry.epoch = epoch;
        entry.lr = lr;
        entry.grad_norm = grad_norm;
        entry.loss = loss;
        entry.z = vicreg::collapse_diagnostics(z);
        entry.z_prime = vicreg::collapse_diagnostics(zp);
        log_event(LogLevel::Info, "pretrain", entry.to_json());
        if (monitor.observe(std::min(entry.z.std_mean, entry.z_prime.std_mean))) {
          result.collapse_detected = true;
          log_event(LogLevel::Warn, "CollapseDetected",
                    {{"iteration", entry.iteration},
                     {"std_mean", std::min(entry.z.std_mean, entry.z_prime.std_mean)}});
        }
        if (on_log) on_log(entry);
        result.log.push_back(std::move(entry));
      }
      if (last) {
        result.stop_reason = "iterations";
        return result;
      }
    }
    if (epoch_steps == 0) fail(ErrorCode::EmptyDataset, "no complete batch of 2 or more segments");
    if (cfg.early_stopping) {
      stopper.observe(epoch, epoch_loss / static_cast<double>(epoch_steps));
      if (stopper.should_stop()) {
        result.stop_reason = "early_stop";
        break;
      }
    }
  }
  return result;
}

}  // namespace flowgate::train
