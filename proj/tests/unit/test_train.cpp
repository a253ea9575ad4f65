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

#include <doctest.h>
#include <torch/torch.h>

#include <fstream>

#include "flowgate/error.hpp"
#include "flowgate/model/fgn.hpp"
#include "flowgate/train/checkpoint.hpp"
#include "flowgate/train/pretrain.hpp"
#include "flowgate/train/schedule.hpp"
#include "flowgate/train/trainer.hpp"
#include "flowgate/train/transfer.hpp"
#include "flowgate/vicreg/ssl_model.hpp"
#include "../support/oracles.hpp"

using namespace flowgate;
using namespace flowgate::train;
namespace fs = std::filesystem;

namespace {

model::FgnConfig small_fgn() {
  model::FgnConfig c;
  c.frame_size = 64;
  return c;
}

data::InMemorySegments tiny_set(std::size_t n, std::uint64_t seed) {
  torch::manual_seed(static_cast<std::int64_t>(seed));
  data::InMemorySegments set;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t label = static_cast<std::int64_t>(i % 2);
    auto flow = label ? torch::randn({2, 16, 64, 64}) : torch::randn({2, 16, 64, 64}) * 0.01;
    set.push_back({torch::rand({3, 16, 64, 64}), flow, label, "s" + std::to_string(i)});
  }
  return set;
}

TrainConfig quick(std::int64_t epochs) {
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs = epochs;
  cfg.patience = std::min<std::int64_t>(15, epochs);
  cfg.seed = 3;
  return cfg;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoError;
}

bool same_state(const torch::nn::Module& a, const std::map<std::string, torch::Tensor>& b) {
  for (const auto& [name, t] : module_state(a)) {
    if (!b.count(name) || !torch::equal(t, b.at(name))) return false;
  }
  return true;
}

vicreg::ExpanderConfig tiny_expander() {
  vicreg::ExpanderConfig e;
  e.dims = {32, 32, 16};
  return e;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("cosine_lr: endpoints, midpoint and range") {
  TrainConfig cfg;
  CHECK(cosine_lr(0, cfg) == 0.01);
  CHECK(cosine_lr(30, cfg) == 0.001);
  CHECK(cosine_lr(15, cfg) == 0.0055);
  double prev = 1.0;
  for (int t = 0; t <= 30; ++t) {
    const double lr = cosine_lr(t, cfg);
    CHECK(lr <= prev);
    prev = lr;
  }
  CHECK(code_of([&] { cosine_lr(31, cfg); }) == ErrorCode::OutOfRange);
  CHECK(code_of([&] { cosine_lr(-1, cfg); }) == ErrorCode::OutOfRange);
}

TEST_CASE("train config invariants") {
  TrainConfig cfg;
  cfg.patience = 40;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.eta_min = 0.02;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("weight decay covers conv and linear weights only") {
  model::FgnModelImpl m(small_fgn());
  const auto decayed = decayed_parameters(m);
  const auto plain = undecayed_parameters(m);
  CHECK(decayed.size() + plain.size() == m.named_parameters().size());
  for (const auto& n : decayed) {
    CHECK_MESSAGE(n.find("bn") == std::string::npos, n);
    CHECK(n.size() > 7);
    CHECK(n.substr(n.size() - 7) == ".weight");
  }
  for (const auto& n : plain) {
    const bool bias = n.size() >= 5 && n.substr(n.size() - 5) == ".bias";
    const bool norm = n.find(".bn_") != std::string::npos;
    CHECK_MESSAGE((bias || norm), n);
  }
  CHECK(std::find(decayed.begin(), decayed.end(), "rgb.stage1.conv_s.weight") != decayed.end());
  CHECK(std::find(plain.begin(), plain.end(), "rgb.stage1.bn_s.weight") != plain.end());
  CHECK(std::find(plain.begin(), plain.end(), "classifier.fc1.bias") != plain.end());
}

TEST_CASE("SGD step follows the momentum update with weight decay") {
  struct Quad : torch::nn::Module {
    torch::Tensor weight;
    Quad() { weight = register_parameter("weight", torch::full({1, 1}, 2.0, torch::kFloat64)); }
  } q;
  TrainConfig cfg;
  cfg.lr = 0.1;
  cfg.momentum = 0.9;
  cfg.weight_decay = 0.05;
  auto opt = make_sgd(q, cfg);
  // f(w) = 1.5 (w - 0.5)^2
  long double w = 2.0L, buf = 0.0L;
  for (int step = 0; step < 5; ++step) {
    opt->zero_grad();
    auto loss = 1.5 * (q.weight - 0.5).square().sum();
    loss.backward();
    opt->step();
    const long double g = 3.0L * (w - 0.5L) + 0.05L * w;
    buf = step == 0 ? g : 0.9L * buf + g;
    w -= 0.1L * buf;
    CHECK(q.weight.item<double>() == doctest::Approx(static_cast<double>(w)).epsilon(1e-12));
  }
}

TEST_CASE("early stopping monitor") {
  EarlyStopping es(2);
  CHECK(es.observe(0, 1.0));
  CHECK_FALSE(es.observe(1, 1.0));
  CHECK(es.observe(2, 0.5));
  CHECK_FALSE(es.observe(3, 0.7));
  CHECK_FALSE(es.should_stop());
  CHECK_FALSE(es.observe(4, 0.6));
  CHECK(es.should_stop());
  CHECK(es.best_epoch() == 2);
}

TEST_CASE("train_supervised: flat validation loss exhausts the patience") {
  auto m = model::build_fgn(small_fgn(), 1);
  auto train = tiny_set(4, 1), val = tiny_set(2, 2);
  TrainHooks hooks;
  hooks.loss = [](const torch::Tensor& logits, const torch::Tensor&) {
    return (logits * 0.0).sum() + 0.75;
  };
  auto cfg = quick(30);
  cfg.patience = 15;
  const auto h = train_supervised(*m, train, val, cfg, augment::AugmentConfig{}, hooks);
  CHECK(h.stop_reason == "early_stop");
  CHECK(h.epochs.size() == 16);
  CHECK(h.best_epoch == 0);
}

TEST_CASE("train_supervised: the best-validation weights are returned") {
  auto m = model::build_fgn(small_fgn(), 2);
  auto train = tiny_set(8, 3), val = tiny_set(4, 4);
  std::vector<std::map<std::string, torch::Tensor>> states;
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord&) { states.push_back(module_state(*m)); };
  auto cfg = quick(4);
  cfg.lr = 0.05;
  cfg.eta_min = 0.01;
  cfg.t_max = 4;
  const auto h = train_supervised(*m, train, val, cfg, augment::AugmentConfig{}, hooks);
  REQUIRE(h.epochs.size() == 4);
  REQUIRE(h.best_epoch >= 0);
  double best = 1e300;
  std::int64_t arg = -1;
  for (const auto& e : h.epochs) {
    if (e.val_loss < best) {
      best = e.val_loss;
      arg = e.epoch;
    }
  }
  CHECK(h.best_epoch == arg);
  CHECK(same_state(*m, states[static_cast<std::size_t>(h.best_epoch)]));
  for (std::size_t i = 0; i < h.epochs.size(); ++i) {
    CHECK(h.epochs[i].lr == doctest::Approx(cosine_lr(static_cast<double>(i), cfg)));
  }
}

TEST_CASE("train_supervised: one seed reproduces the history exactly") {
  auto run = [] {
    auto m = model::build_fgn(small_fgn(), 7);
    auto train = tiny_set(6, 5), val = tiny_set(2, 6);
    return train_supervised(*m, train, val, quick(2), augment::AugmentConfig{});
  };
  const auto a = run(), b = run();
  CHECK(a.to_json(false) == b.to_json(false));
}

TEST_CASE("train_supervised: empty data and non-finite loss") {
  auto m = model::build_fgn(small_fgn(), 1);
  data::InMemorySegments empty;
  auto val = tiny_set(2, 1);
  CHECK(code_of([&] { train_supervised(*m, empty, val, quick(1), {}); }) ==
        ErrorCode::EmptyDataset);

  oracle::TempDir tmp("nonfinite");
  TrainHooks hooks;
  hooks.dump_dir = tmp.path;
  hooks.loss = [](const torch::Tensor& logits, const torch::Tensor&) {
    return logits.sum() * std::numeric_limits<float>::quiet_NaN();
  };
  auto train = tiny_set(4, 1);
  CHECK(code_of([&] { train_supervised(*m, train, val, quick(1), {}, hooks); }) ==
        ErrorCode::NonFiniteLoss);
  std::ifstream dump(tmp.path / "nonfinite_dump.json");
  REQUIRE(dump.good());
  const auto j = nlohmann::json::parse(dump);
  CHECK(j["loss"] == "nan");
  CHECK(j["epoch"] == 0);
}

TEST_CASE("supervised_loss: binary and multi-class") {
  auto logits = torch::tensor({{0.0f}, {2.0f}});
  auto labels = torch::tensor({0, 1}, torch::kInt64);
  const double expect = (std::log(2.0) + std::log1p(std::exp(-2.0))) / 2.0;
  CHECK(supervised_loss(logits, labels, LossKind::Bce).item<double>() ==
        doctest::Approx(expect).epsilon(1e-6));
  auto ce = supervised_loss(torch::zeros({2, 4}), labels, LossKind::CrossEntropy);
  CHECK(ce.item<double>() == doctest::Approx(std::log(4.0)).epsilon(1e-6));
}

TEST_CASE("checkpoint: round trip gives bit-identical logits") {
  oracle::TempDir tmp("ckpt");
  auto m = model::build_fgn(small_fgn(), 4);
  m->eval();
  torch::NoGradGuard ng;
  auto r = torch::randn({2, 3, 16, 64, 64}), f = torch::randn({2, 2, 16, 64, 64});
  auto before = m->forward(r, f);
  save_checkpoint(*m, tmp.path / "c", {{"model", "small"}}, {{"epoch", 3}});
  CHECK_FALSE(fs::exists(tmp.path / "c.tmp"));
  const auto ck = load_checkpoint(tmp.path / "c");
  CHECK(ck.metadata["epoch"] == 3);
  CHECK(ck.groups == std::vector<std::string>{"classifier", "flow", "merge", "rgb"});
  auto other = model::build_fgn(small_fgn(), 99);
  other->eval();
  load_state(*other, ck.tensors);
  CHECK(torch::equal(other->forward(r, f), before));
  // Buffers come back too.
  CHECK(torch::equal(other->named_buffers()["rgb.stage1.bn_s.num_batches_tracked"],
                     m->named_buffers()["rgb.stage1.bn_s.num_batches_tracked"]));
}

TEST_CASE("checkpoint: damaged directories are rejected") {
  oracle::TempDir tmp("ckpt");
  auto m = model::build_fgn(small_fgn(), 4);
  const auto dir = tmp.path / "c";
  save_checkpoint(*m, dir);

  const auto file = dir / "rgb.stage1.conv_s.weight.jt";
  REQUIRE(fs::exists(file));
  fs::resize_file(file, fs::file_size(file) - 8);
  try {
    load_checkpoint(dir);
    FAIL("expected TruncatedPayload");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncatedPayload);
    CHECK(std::string(e.what()).find("rgb.stage1.conv_s.weight") != std::string::npos);
  }

  save_checkpoint(*m, dir);
  auto manifest = read_manifest(dir);
  auto edit = [&](const nlohmann::json& j) { std::ofstream(dir / "manifest.json") << j.dump(); };

  auto bumped = manifest;
  bumped["format_version"] = 2;
  edit(bumped);
  CHECK(code_of([&] { load_checkpoint(dir); }) == ErrorCode::UnsupportedVersion);

  auto miscount = manifest;
  miscount["tensor_count"] = manifest["tensor_count"].get<int>() + 1;
  edit(miscount);
  CHECK(code_of([&] { load_checkpoint(dir); }) == ErrorCode::TensorCountMismatch);

  std::ofstream(dir / "manifest.json") << "{ not json";
  CHECK(code_of([&] { load_checkpoint(dir); }) == ErrorCode::CorruptManifest);

  auto no_tensors = manifest;
  no_tensors.erase("tensors");
  edit(no_tensors);
  CHECK(code_of([&] { load_checkpoint(dir); }) == ErrorCode::CorruptManifest);
}

TEST_CASE("transfer: {rgb, flow} keeps the fresh merge block") {
  oracle::TempDir tmp("transfer");
  auto ssl = vicreg::build_ssl_model(small_fgn(), tiny_expander(), 10);
  // Make the pretrained weights distinguishable from any fresh init.
  {
    torch::NoGradGuard ng;
    for (auto& p : ssl->parameters()) p.add_(0.5);
  }
  save_checkpoint(*ssl, tmp.path / "ssl");
  const auto ck = load_checkpoint(tmp.path / "ssl");
  CHECK(ck.groups == std::vector<std::string>{"expander", "flow", "merge", "rgb"});

  auto target = model::build_fgn(small_fgn(), 20);
  const auto fresh = module_state(*target);
  const auto report = transfer_weights(*target, ck, TransferPolicy{});
  CHECK_FALSE(report.copied.empty());
  for (const auto& [name, t] : module_state(*target)) {
    const auto g = model::parameter_group(name);
    if (g == "rgb" || g == "flow") {
      CHECK_MESSAGE(torch::equal(t, ck.tensors.at(name)), name);
    } else {
      CHECK_MESSAGE(torch::equal(t, fresh.at(name)), name);
    }
  }
  for (const auto& n : report.copied) CHECK(n.rfind("expander", 0) != 0);

  auto all = model::build_fgn(small_fgn(), 20);
  TransferPolicy with_merge;
  with_merge.include = {"rgb", "flow", "merge"};
  transfer_weights(*all, ck, with_merge);
  for (const auto& [name, t] : module_state(*all)) {
    if (model::parameter_group(name) == "merge") CHECK(torch::equal(t, ck.tensors.at(name)));
  }
}

TEST_CASE("transfer: missing groups and shape mismatches") {
  oracle::TempDir tmp("transfer");
  auto ssl = vicreg::build_ssl_model(small_fgn(), tiny_expander(), 10);
  save_checkpoint(*ssl, tmp.path / "ssl");
  auto ck = load_checkpoint(tmp.path / "ssl");
  for (auto it = ck.tensors.begin(); it != ck.tensors.end();) {
    it = model::parameter_group(it->first) == "flow" ? ck.tensors.erase(it) : std::next(it);
  }
  ck.groups = {"expander", "merge", "rgb"};
  auto target = model::build_fgn(small_fgn(), 1);
  const auto before = module_state(*target);
  CHECK(code_of([&] { transfer_weights(*target, ck, TransferPolicy{}); }) ==
        ErrorCode::MissingGroup);
  CHECK(same_state(*target, before));

  auto wide_cfg = small_fgn();
  wide_cfg.rgb_channels = {8, 16, 32, 32};
  auto wide = model::build_fgn(wide_cfg, 1);
  const auto full = load_checkpoint(tmp.path / "ssl");
  CHECK(code_of([&] { transfer_weights(*wide, full, TransferPolicy{}); }) ==
        ErrorCode::ShapeMismatch);

  TransferPolicy empty;
  empty.include.clear();
  CHECK_THROWS_AS(empty.validate(), Error);
}

TEST_CASE("pretrain: collapse warning when the variance term is switched off") {
  // Identical segments, no augmentation and no dropout give identical rows, so the embeddings
  // have no spread and nothing in the objective restores it.
  auto fgn = small_fgn();
  fgn.spatial_dropout_p = 0.0;
  fgn.classifier_dropout_p = 0.0;
  auto pair = data::SegmentPair{torch::full({3, 16, 64, 64}, 0.5f), torch::zeros({2, 16, 64, 64}),
                                {}, "same"};
  data::InMemorySegments set(std::vector<data::SegmentPair>(8, pair));
  auto m = vicreg::build_ssl_model(fgn, tiny_expander(), 1);
  PretrainConfig cfg;
  cfg.train = quick(30);
  cfg.train.loss = LossKind::Vicreg;
  cfg.iterations = 4;
  cfg.log_interval = 1;
  cfg.weights.mu = 0.0;
  cfg.weights.nu = 0.0;
  augment::AugmentConfig aug;
  aug.jitter_prob = 0.0;
  aug.flip_prob = 0.0;
  aug.zoom_scale = {1.0, 1.0};
  aug.zoom_aspect = {1.0, 1.0};
  const auto r = pretrain_vicreg(*m, set, cfg, aug);
  CHECK(r.collapse_detected);
  CHECK(r.iterations == 4);
  CHECK(r.stop_reason == "iterations");
  REQUIRE(r.log.size() == 4);
  CHECK(r.log[0].z.std_mean < 0.01);
  CHECK(r.log[3].z.rank == 0);
}

TEST_CASE("pretrain: losses are logged per iteration and the run is reproducible") {
  auto set = tiny_set(8, 9);
  PretrainConfig cfg;
  cfg.train = quick(30);
  cfg.train.loss = LossKind::Vicreg;
  cfg.iterations = 3;
  cfg.log_interval = 2;
  auto run = [&] {
    auto m = vicreg::build_ssl_model(small_fgn(), tiny_expander(), 5);
    return pretrain_vicreg(*m, set, cfg, augment::AugmentConfig{});
  };
  const auto a = run(), b = run();
  REQUIRE(a.losses.size() == 3);
  CHECK(a.losses == b.losses);
  CHECK(a.log.size() == 3);  // the first and last iterations are always logged
  CHECK_FALSE(a.collapse_detected);
}

TEST_CASE("pretrain: gradient clipping bounds the first step") {
  auto set = tiny_set(4, 10);
  PretrainConfig cfg;
  cfg.train = quick(30);
  cfg.train.loss = LossKind::Vicreg;
  cfg.train.weight_decay = 0.0;
  cfg.iterations = 1;
  cfg.log_interval = 1;
  cfg.max_grad_norm = 1e-3;
  auto m = vicreg::build_ssl_model(small_fgn(), tiny_expander(), 7);
  auto before = torch::cat([&] {
    std::vector<torch::Tensor> v;
    for (const auto& p : m->parameters()) v.push_back(p.detach().flatten().clone());
    return v;
  }());
  const auto r = pretrain_vicreg(*m, set, cfg, augment::AugmentConfig{});
  std::vector<torch::Tensor> after;
  for (const auto& p : m->parameters()) after.push_back(p.detach().flatten());
  // First SGD step: the momentum buffer is the clipped gradient itself.
  const double step = (torch::cat(after) - before).norm().item<double>();
  REQUIRE(r.log.size() == 1);
  CHECK(r.log[0].grad_norm > cfg.max_grad_norm);
  // float32 weights are much larger than the step, so the difference carries
  // rounding of a few parts in 1e5.
  CHECK(step == doctest::Approx(cfg.train.lr * cfg.max_grad_norm).epsilon(1e-2));

  cfg.max_grad_norm = -1.0;
  CHECK(code_of([&] { cfg.validate(); }) == ErrorCode::BadConfig);
}

}  // TEST_SUITE
