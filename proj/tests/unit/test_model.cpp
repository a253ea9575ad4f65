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

#include "flowgate/error.hpp"
#include "flowgate/model/accounting.hpp"
#include "flowgate/model/fgn.hpp"

using namespace flowgate;
using namespace flowgate::model;

namespace {

FgnConfig small_config(std::int64_t size = 64, std::int64_t frames = 16) {
  FgnConfig cfg;
  cfg.frame_size = size;
  cfg.n_frames = frames;
  return cfg;
}

std::pair<torch::Tensor, torch::Tensor> inputs(std::int64_t b, const FgnConfig& cfg) {
  return {torch::randn({b, 3, cfg.n_frames, cfg.frame_size, cfg.frame_size}),
          torch::randn({b, 2, cfg.n_frames, cfg.frame_size, cfg.frame_size})};
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("build_fgn: parameter count in the target band, deterministic init") {
  auto a = build_fgn(FgnConfig{}, 5);
  auto b = build_fgn(FgnConfig{}, 5);
  const auto n = count_params(*a);
  MESSAGE("params " << n);
  CHECK(n >= 245000);
  CHECK(n <= 300000);
  auto pa = a->named_parameters();
  auto pb = b->named_parameters();
  REQUIRE(pa.size() == pb.size());
  for (const auto& item : pa) CHECK(torch::equal(item.value(), pb[item.key()]));
  auto c = build_fgn(FgnConfig{}, 6);
  CHECK_FALSE(torch::equal(c->named_parameters()["rgb.stage1.conv_s.weight"],
                           pa["rgb.stage1.conv_s.weight"]));
}

TEST_CASE("build_fgn: multi-class head width and invalid configs") {
  auto cfg = small_config();
  cfg.num_classes = 51;
  auto m = build_fgn(cfg, 0);
  m->eval();
  auto [r, f] = inputs(2, cfg);
  CHECK(m->forward(r, f).sizes() == torch::IntArrayRef({2, 51}));
  auto bad = small_config();
  bad.spatial_dropout_p = 1.0;
  CHECK_THROWS_AS(build_fgn(bad, 0), Error);
  bad = small_config(32);
  CHECK_THROWS_AS(build_fgn(bad, 0), Error);
  bad = small_config();
  bad.flow_channels = {16, 16, 32, 64};
  try {
    build_fgn(bad, 0);
    FAIL("expected BadConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadConfig);
  }
}

TEST_CASE("parameter names are grouped by block prefix") {
  auto m = build_fgn(small_config(), 0);
  for (const auto& item : m->named_parameters()) {
    const auto g = parameter_group(item.key());
    CHECK_MESSAGE((g == "rgb" || g == "flow" || g == "merge" || g == "classifier"), item.key());
  }
  CHECK(parameter_group("expander.fc1.weight") == "expander");
  CHECK(parameter_group("other.weight").empty());
}

TEST_CASE("count_params: empty module and one added bias-free layer") {
  torch::nn::Module empty;
  CHECK(count_params(empty) == 0);
  auto m = build_fgn(FgnConfig{}, 0);
  const auto before = count_params(*m);
  m->register_module("probe_head",
                     torch::nn::Linear(torch::nn::LinearOptions(1024, 10).bias(false)));
  CHECK(count_params(*m) - before == 10240);
}

TEST_CASE("forward: default config at full resolution gives (B, 1) logits") {
  auto m = build_fgn(FgnConfig{}, 1);
  m->eval();
  torch::NoGradGuard ng;
  auto [r, f] = inputs(2, FgnConfig{});
  auto logits = m->forward(r, f);
  CHECK(logits.sizes() == torch::IntArrayRef({2, 1}));
  CHECK(torch::isfinite(logits).all().item<bool>());
}

TEST_CASE("forward_features: 1024 without temporal pooling, 128 with it") {
  auto m = build_fgn(FgnConfig{}, 1);
  m->eval();
  CHECK(m->feature_width(false) == 1024);
  CHECK(m->feature_width(true) == 128);
  torch::NoGradGuard ng;
  auto [r, f] = inputs(1, FgnConfig{});
  CHECK(m->forward_features(r, f, false).sizes() == torch::IntArrayRef({1, 1024}));
  CHECK(m->forward_features(r, f, true).sizes() == torch::IntArrayRef({1, 128}));
  auto s = build_fgn(small_config(), 1);
  s->eval();
  auto [r3, f3] = inputs(3, small_config());
  CHECK(s->forward_features(r3, f3).size(0) == 3);
}

TEST_CASE("forward: mismatched inputs raise ShapeMismatch") {
  auto cfg = small_config();
  auto m = build_fgn(cfg, 0);
  auto [r, f] = inputs(2, cfg);
  try {
    m->forward(r, f.narrow(0, 0, 1));
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  CHECK_THROWS_AS(m->forward(r, r), Error);
}

TEST_CASE("gate: merged equals relu(rgb) times sigmoid(flow)") {
  auto cfg = small_config();
  auto m = build_fgn(cfg, 2);
  m->eval();
  torch::NoGradGuard ng;
  auto [r, f] = inputs(2, cfg);
  ForwardProbe probe;
  m->forward(r, f, &probe);
  auto expect = probe.rgb_features * torch::sigmoid(probe.flow_preactivation);
  CHECK(torch::equal(probe.merged, expect));
  CHECK((probe.rgb_features >= 0).all().item<bool>());
  CHECK(probe.pooled.size(2) == cfg.n_frames / cfg.temporal_pool);
}

TEST_CASE("gate: closed gate matches the zero-merged response") {
  auto cfg = small_config();
  auto m = build_fgn(cfg, 3);
  m->eval();
  torch::NoGradGuard ng;
  auto [r, f] = inputs(2, cfg);
  ForwardProbe closed;
  closed.flow_preactivation_fill = -1e6f;
  auto a = m->forward(r, f, &closed);
  CHECK(closed.merged.abs().max().item<double>() == 0.0);
  ForwardProbe zero;
  zero.zero_merged = true;
  auto b = m->forward(r, f, &zero);
  CHECK(torch::equal(a, b));
  // Rows agree with each other: the input no longer matters.
  CHECK(torch::equal(a[0], a[1]));
}

TEST_CASE("gate: open gate passes the rgb features through") {
  auto cfg = small_config();
  auto m = build_fgn(cfg, 3);
  m->eval();
  torch::NoGradGuard ng;
  auto [r, f] = inputs(2, cfg);
  ForwardProbe open;
  open.flow_preactivation_fill = 1e6f;
  m->forward(r, f, &open);
  auto rgb_only = m->rgb_path(r);
  CHECK((open.merged - rgb_only).abs().max().item<double>() < 1e-5);
}

TEST_CASE("temporal max pooling ignores the order of frames") {
  auto m = build_fgn(small_config(), 0);
  auto x = torch::randn({2, 32, 8, 2, 2});
  auto perm = torch::randperm(8);
  CHECK(torch::equal(m->temporal_max_pool(x), m->temporal_max_pool(x.index_select(2, perm))));
}

TEST_CASE("zero inputs give finite logits; eval forward is deterministic") {
  auto cfg = small_config();
  auto m = build_fgn(cfg, 4);
  m->eval();
  torch::NoGradGuard ng;
  auto z = m->forward(torch::zeros({2, 3, 16, 64, 64}), torch::zeros({2, 2, 16, 64, 64}));
  CHECK(torch::isfinite(z).all().item<bool>());
  auto [r, f] = inputs(2, cfg);
  CHECK(torch::equal(m->forward(r, f), m->forward(r, f)));
}

TEST_CASE("every parameter receives gradient") {
  auto cfg = small_config();
  auto m = build_fgn(cfg, 5);
  m->train();
  torch::manual_seed(0);
  auto [r, f] = inputs(4, cfg);
  auto loss = m->forward(r, f).square().mean();
  loss.backward();
  for (const auto& item : m->named_parameters()) {
    REQUIRE_MESSAGE(item.value().grad().defined(), item.key());
    CHECK_MESSAGE(item.value().grad().abs().max().item<double>() > 0.0, item.key());
  }
}

TEST_CASE("count_macs: default and legacy layouts") {
  const auto d = count_macs(FgnConfig{});
  const auto l = count_macs(FgnConfig::legacy());
  MESSAGE("default " << d << ", legacy " << l << ", ratio " << double(l) / double(d));
  CHECK(d >= 0.9 * 4.432e9);
  CHECK(d <= 1.1 * 4.432e9);
  CHECK(l > d);
  // Independent of batch size.
  FgnModelImpl m(FgnConfig{});
  CHECK(count_macs(m, {1, 3, 16, 224, 224}) == count_macs(m, {2, 3, 16, 224, 224}));
}

TEST_CASE("count_macs: hand-computed first stage of the rgb branch") {
  // conv 1x3x3 3->16 over 16x224x224, then 3x1x1 16->16 on the same grid.
  const std::int64_t vox = 16LL * 224 * 224;
  const std::int64_t first = vox * 16 * 3 * 9 + vox * 16 * 16 * 3;
  FgnModelImpl m(FgnConfig{});
  std::int64_t macs = 0;
  m.rgb->stages()[0]->trace({3, 16, 224, 224}, &macs);
  CHECK(macs == first);
}

}  // TEST_SUITE
