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

#include "flowgate/train/trainer.hpp"

#include <ATen/autocast_mode.h>
#include <torch/torch.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "flowgate/error.hpp"
#include "flowgate/log.hpp"
#include "flowgate/rng.hpp"
#include "flowgate/train/checkpoint.hpp"

namespace flowgate::train {
namespace {

using json = nlohmann::json;
using Transform = std::function<data::SegmentPair(std::size_t index, const data::SegmentPair&)>;

constexpr std::uint64_t kShuffleTag = 0x5348;
constexpr std::uint64_t kAugmentTag = 0x4155;
constexpr std::uint64_t kDropoutTag = 0x4450;

Batch make_batch(const data::SegmentSource& src, const std::vector<std::size_t>& order,
                 std::size_t first, std::size_t count, const Transform& transform) {
  std::vector<torch::Tensor> rgb, flow;
  std::vector<std::int64_t> labels;
  for (std::size_t k = first; k < first + count; ++k) {
    const auto idx = order[k];
    auto pair = transform(idx, src.get(idx));
    rgb.push_back(pair.rgb);
    flow.push_back(pair.flow);
    labels.push_back(pair.label.value_or(-1));
  }
  return {torch::stack(rgb).to(torch::kFloat32), torch::stack(flow).to(torch::kFloat32),
          torch::tensor(labels, torch::kInt64)};
}

struct AutocastScope {
  explicit AutocastScope(bool on) : on_(on) {
    if (on_) {
      at::autocast::set_autocast_dtype(at::kCPU, at::kBFloat16);
      at::autocast::set_autocast_enabled(at::kCPU, true);
    }
  }
  ~AutocastScope() {
    if (on_) {
      at::autocast::set_autocast_enabled(at::kCPU, false);
      at::autocast::clear_cache();
    }
  }
  bool on_;
};

[[noreturn]] void nonfinite(const model::FgnModelImpl& model, const TrainHooks& hooks,
                            std::int64_t epoch, std::size_t batch, double loss, double lr) {
  json dump = {{"epoch", epoch}, {"batch", batch}, {"loss", std::isnan(loss) ? "nan" : "inf"},
               {"lr", lr}};
  json bad = json::array();
  for (const auto& p : model.named_parameters()) {
    if (!torch::isfinite(p.value()).all().item<bool>()) bad.push_back(p.key());
    else if (p.value().grad().defined() && !torch::isfinite(p.value().grad()).all().item<bool>()) {
      bad.push_back(p.key() + ".grad");
    }
  }
  dump["nonfinite_tensors"] = bad;
  if (!hooks.dump_dir.empty()) {
    std::filesystem::create_directories(hooks.dump_dir);
    std::ofstream(hooks.dump_dir / "nonfinite_dump.json") << dump.dump(2) << '\n';
  }
  log_event(LogLevel::Error, "nonfinite_loss", dump);
  fail(ErrorCode::NonFiniteLoss, "non-finite training loss at epoch " + std::to_string(epoch) +
                                     ", batch " + std::to_string(batch));
}

double accuracy_of(const Predictions& p, LossKind kind) {
  if (p.labels.empty()) return 0.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < p.labels.size(); ++i) {
    std::int64_t pred;
    if (kind == LossKind::CrossEntropy) {
      pred = p.probs[static_cast<std::int64_t>(i)].argmax().item<std::int64_t>();
    } else {
      pred = p.scores[i] >= 0.5 ? 1 : 0;
    }
    hit += pred == p.labels[i];
  }
  return static_cast<double>(hit) / static_cast<double>(p.labels.size());
}

}  // namespace

json EpochRecord::to_json(bool with_time) const {
  json j = {{"epoch", epoch},     {"train_loss", train_loss},     {"val_loss", val_loss},
            {"val_accuracy", val_accuracy}, {"lr", lr}};
  if (with_time) j["wall_time"] = wall_time;
  return j;
}

json TrainHistory::to_json(bool with_time) const {
  json e = json::array();
  for (const auto& r : epochs) e.push_back(r.to_json(with_time));
  return {{"epochs", e}, {"best_epoch", best_epoch}, {"stop_reason", stop_reason}};
}

void TrainHistory::write_jsonl(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  for (const auto& r : epochs) out << r.to_json().dump() << '\n';
  out << json{{"best_epoch", best_epoch}, {"stop_reason", stop_reason}}.dump() << '\n';
}

torch::Tensor supervised_loss(const torch::Tensor& logits, const torch::Tensor& labels,
                              LossKind kind) {
  switch (kind) {
    case LossKind::Bce:
      if (logits.dim() != 2 || logits.size(1) != 1) {
        fail(ErrorCode::ShapeMismatch, "binary loss expects B x 1 logits");
      }
      return torch::binary_cross_entropy_with_logits(logits.squeeze(1).to(torch::kFloat32),
                                                     labels.to(torch::kFloat32));
    case LossKind::CrossEntropy:
      return torch::nn::functional::cross_entropy(logits.to(torch::kFloat32), labels);
    case LossKind::Vicreg:
      break;
  }
  fail(ErrorCode::BadConfig, "the vicreg loss is not a supervised loss");
}

Predictions predict(model::FgnModelImpl& model, const data::SegmentSource& source,
                    std::int64_t batch_size, LossKind kind, const LossFn& loss_override) {
  torch::NoGradGuard no_grad;
  const bool was_training = model.is_training();
  model.eval();
  Predictions out;
  std::vector<std::size_t> order(source.size());
  std::iota(order.begin(), order.end(), 0);
  const Transform standardize = [](std::size_t, const data::SegmentPair& p) {
    return augment::standardize_pair(p);
  };
  std::vector<torch::Tensor> probs;
  double loss_sum = 0.0;
  bool labelled = true;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const auto count = std::min<std::size_t>(batch_size, order.size() - first);
    auto b = make_batch(source, order, first, count, standardize);
    auto logits = model.forward(b.rgb, b.flow).to(torch::kFloat32);
    const bool has_labels = (b.labels >= 0).all().item<bool>();
    labelled = labelled && has_labels;
    if (has_labels) {
      auto l = loss_override ? loss_override(logits, b.labels) : supervised_loss(logits, b.labels, kind);
      loss_sum += l.item<double>() * static_cast<double>(count);
    }
    auto p = kind == LossKind::CrossEntropy ? torch::softmax(logits, 1) : torch::sigmoid(logits);
    probs.push_back(p.to(torch::kFloat64));
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
      out.labels.push_back(b.labels[i].item<std::int64_t>());
      out.scores.push_back(kind == LossKind::CrossEntropy ? p[i].max().item<double>()
                                                          : p[i][0].item<double>());
    }
  }
  out.probs = probs.empty() ? torch::empty({0, 1}, torch::kFloat64) : torch::cat(probs);
  out.loss = labelled && !order.empty() ? loss_sum / static_cast<double>(order.size())
                                        : std::numeric_limits<double>::quiet_NaN();
  if (was_training) model.train();
  return out;
}

TrainHistory train_supervised(model::FgnModelImpl& model, const data::SegmentSource& train_set,
                              const data::SegmentSource& val_set, const TrainConfig& cfg,
                              const augment::AugmentConfig& aug, const TrainHooks& hooks) {
  cfg.validate();
  aug.validate();
  if (train_set.size() == 0) fail(ErrorCode::EmptyDataset, "training set is empty");
  if (val_set.size() == 0) fail(ErrorCode::EmptyDataset, "validation set is empty");

  auto optimizer = make_sgd(model, cfg);
  EarlyStopping stopper(cfg.patience);
  auto best_state = module_state(model);
  TrainHistory history;
  history.stop_reason = "max_epochs";
  const bool mixed = cfg.precision == Precision::Mixed;

  for (std::int64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double lr = cosine_lr(static_cast<double>(std::min(epoch, cfg.t_max)), cfg);
    set_learning_rate(*optimizer, lr);
    torch::manual_seed(derive_seed(cfg.seed, {kDropoutTag, static_cast<std::uint64_t>(epoch)}));

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle(derive_seed(cfg.seed, {kShuffleTag, static_cast<std::uint64_t>(epoch)}));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle.uniform_int(static_cast<std::int64_t>(i))]);
    }
    const Transform augment_sample = [&](std::size_t idx, const data::SegmentPair& p) {
      Rng rng(derive_seed(cfg.seed, {kAugmentTag, static_cast<std::uint64_t>(epoch), idx}));
      return augment::primary_augment(p, rng, aug);
    };

    model.train();
    double loss_sum = 0.0;
    std::size_t seen = 0, batch_index = 0;
    for (std::size_t first = 0; first < order.size(); first += cfg.batch_size, ++batch_index) {
      const auto count = std::min<std::size_t>(cfg.batch_size, order.size() - first);
      auto b = make_batch(train_set, order, first, count, augment_sample);
      if ((b.labels < 0).any().item<bool>()) {
        fail(ErrorCode::EmptyDataset, "training segments must carry labels");
      }
      torch::Tensor loss;
      {
        AutocastScope scope(mixed);
        auto logits = model.forward(b.rgb, b.flow).to(torch::kFloat32);
        loss = hooks.loss ? hooks.loss(logits, b.labels) : supervised_loss(logits, b.labels, cfg.loss);
      }
      const double value = loss.item<double>();
      if (!std::isfinite(value)) nonfinite(model, hooks, epoch, batch_index, value, lr);
      optimizer->zero_grad();
      if (loss.requires_grad()) loss.backward();
      optimizer->step();
      loss_sum += value * static_cast<double>(count);
      seen += count;
    }

    auto preds = predict(model, val_set, cfg.batch_size, cfg.loss, hooks.loss);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(std::max<std::size_t>(seen, 1));
    rec.val_loss = preds.loss;
    rec.val_accuracy = accuracy_of(preds, cfg.loss);
    rec.lr = lr;
    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.epochs.push_back(rec);
    log_event(LogLevel::Info, "epoch", rec.to_json());
    if (hooks.on_epoch) hooks.on_epoch(rec);

    if (stopper.observe(epoch, rec.val_loss)) best_state = module_state(model);
    if (stopper.should_stop()) {
      history.stop_reason = "early_stop";
      break;
    }
  }
  history.best_epoch = stopper.best_epoch();
  load_state(model, best_state);
  return history;
}

}  // namespace flowgate::train
