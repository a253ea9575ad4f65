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

#include "flowgate/cli/config.hpp"

#include <fstream>

#include "flowgate/error.hpp"

namespace flowgate::cli {
namespace {

using json = nlohmann::json;

template <typename Fn>
void section_check(const std::string& section, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    fail(ErrorCode::ConfigInvalid, "/" + section + ": " + e.what());
  }
}

json split_name(data::Split s) { return data::to_string(s); }

}  // namespace

json ExperimentConfig::to_json() const {
  const auto& syn = data.synthetic;
  const auto& fp = data.flow;
  const auto& w = vicreg.weights;
  return {
      {"seed", seed},
      {"output", {{"dir", output_dir.string()}}},
      {"data",
       {{"root", data.root.string()},
        {"segments", data.segments.string()},
        {"frame_size", data.frame_size},
        {"default_fps", data.default_fps},
        {"synthetic",
         {{"train_clips", syn.train_clips},
          {"val_clips", syn.val_clips},
          {"duration", syn.spec.duration},
          {"fps", syn.spec.fps},
          {"blob_sigma", syn.spec.blob_sigma},
          {"blob_speed", syn.spec.blob_speed},
          {"jitter_prob", syn.spec.jitter_prob}}},
        {"flow",
         {{"pyramid_scale", fp.pyramid_scale},
          {"levels", fp.levels},
          {"window_size", fp.window_size},
          {"iterations", fp.iterations},
          {"poly_n", fp.poly_n},
          {"poly_sigma", fp.poly_sigma}}}}},
      {"sampling",
       {{"n_frames", sampling.n_frames},
        {"target_fps", sampling.target_fps},
        {"stride", sampling.stride}}},
      {"augment",
       {{"jitter_range", augment.jitter_range},
        {"jitter_prob", augment.jitter_prob},
        {"flip_prob", augment.flip_prob},
        {"zoom_scale", {augment.zoom_scale.lo, augment.zoom_scale.hi}},
        {"zoom_aspect", {augment.zoom_aspect.lo, augment.zoom_aspect.hi}},
        {"negate_flow_x_on_flip", augment.negate_flow_x_on_flip}}},
      {"model",
       {{"rgb_channels", model.rgb_channels},
        {"flow_channels", model.flow_channels},
        {"merge_channels", model.merge_channels},
        {"merge_pool_t", model.merge_pool_t},
        {"temporal_pool", model.temporal_pool},
        {"final_pool_t", model.final_pool_t},
        {"dropout_stages", model.dropout_stages},
        {"spatial_dropout_p", model.spatial_dropout_p},
        {"classifier_dropout_p", model.classifier_dropout_p},
        {"fc_dims", model.fc_dims},
        {"num_classes", model.num_classes}}},
      {"vicreg",
       {{"lambda", w.lambda},
        {"mu", w.mu},
        {"nu", w.nu},
        {"gamma", w.gamma},
        {"eps", w.eps},
        {"expander_dims", vicreg.expander_dims},
        {"keep_temporal_pool", vicreg.keep_temporal_pool},
        {"batch_size", vicreg.batch_size},
        {"epochs", vicreg.epochs},
        {"iterations", vicreg.iterations},
        {"log_interval", vicreg.log_interval},
        {"early_stopping", vicreg.early_stopping},
        {"collapse_threshold", vicreg.collapse_threshold},
        {"collapse_patience", vicreg.collapse_patience},
        {"max_grad_norm", vicreg.max_grad_norm}}},
      {"train",
       {{"batch_size", train.batch_size},
        {"epochs", train.epochs},
        {"patience", train.patience},
        {"lr", train.lr},
        {"momentum", train.momentum},
        {"weight_decay", train.weight_decay},
        {"t_max", train.t_max},
        {"eta_min", train.eta_min},
        {"loss", train::to_string(train.loss)},
        {"precision", train::to_string(train.precision)},
        {"pretrained", pretrained.string()},
        {"transfer",
         {{"include", std::vector<std::string>(transfer.include.begin(), transfer.include.end())},
          {"strict_names", transfer.strict_names}}}}},
      {"eval",
       {{"threshold", eval.threshold},
        {"top_k", eval.top_k},
        {"split", split_name(eval.split)},
        {"checkpoint", eval.checkpoint.string()}}}};
}

vicreg::ExpanderConfig ExperimentConfig::expander_config() const {
  vicreg::ExpanderConfig e;
  e.dims = vicreg.expander_dims;
  e.input_dim = model::FgnModelImpl(model).feature_width(vicreg.keep_temporal_pool);
  return e;
}

train::PretrainConfig ExperimentConfig::pretrain_config() const {
  train::PretrainConfig p;
  p.train = train;
  p.train.batch_size = vicreg.batch_size;
  p.train.epochs = vicreg.epochs;
  p.train.patience = std::min(train.patience, vicreg.epochs);
  p.train.loss = train::LossKind::Vicreg;
  p.iterations = vicreg.iterations;
  p.log_interval = vicreg.log_interval;
  p.early_stopping = vicreg.early_stopping;
  p.weights = vicreg.weights;
  p.collapse_threshold = vicreg.collapse_threshold;
  p.collapse_patience = vicreg.collapse_patience;
  p.max_grad_norm = vicreg.max_grad_norm;
  return p;
}

ExperimentConfig parse_config(const json& doc) {
  validate_against_schema(doc, experiment_schema());
  json m = ExperimentConfig{}.to_json();
  m.merge_patch(doc);

  ExperimentConfig c;
  c.seed = m["seed"].get<std::uint64_t>();
  c.output_dir = m["output"]["dir"].get<std::string>();

  const auto& d = m["data"];
  c.data.root = d["root"].get<std::string>();
  c.data.segments = d["segments"].get<std::string>();
  c.data.frame_size = d["frame_size"].get<std::int64_t>();
  c.data.default_fps = d["default_fps"].get<double>();
  const auto& syn = d["synthetic"];
  c.data.synthetic.train_clips = syn["train_clips"].get<std::int64_t>();
  c.data.synthetic.val_clips = syn["val_clips"].get<std::int64_t>();
  c.data.synthetic.spec.duration = syn["duration"].get<double>();
  c.data.synthetic.spec.fps = syn["fps"].get<double>();
  c.data.synthetic.spec.blob_sigma = syn["blob_sigma"].get<double>();
  c.data.synthetic.spec.blob_speed = syn["blob_speed"].get<double>();
  c.data.synthetic.spec.jitter_prob = syn["jitter_prob"].get<double>();
  c.data.synthetic.spec.size = c.data.frame_size;
  const auto& f = d["flow"];
  c.data.flow.pyramid_scale = f["pyramid_scale"].get<double>();
  c.data.flow.levels = f["levels"].get<int>();
  c.data.flow.window_size = f["window_size"].get<int>();
  c.data.flow.iterations = f["iterations"].get<int>();
  c.data.flow.poly_n = f["poly_n"].get<int>();
  c.data.flow.poly_sigma = f["poly_sigma"].get<double>();

  const auto& s = m["sampling"];
  c.sampling.n_frames = s["n_frames"].get<std::int64_t>();
  c.sampling.target_fps = s["target_fps"].get<double>();
  c.sampling.stride = s["stride"].get<std::int64_t>();

  const auto& a = m["augment"];
  c.augment.jitter_range = a["jitter_range"].get<double>();
  c.augment.jitter_prob = a["jitter_prob"].get<double>();
  c.augment.flip_prob = a["flip_prob"].get<double>();
  c.augment.zoom_scale = {a["zoom_scale"][0].get<double>(), a["zoom_scale"][1].get<double>()};
  c.augment.zoom_aspect = {a["zoom_aspect"][0].get<double>(), a["zoom_aspect"][1].get<double>()};
  c.augment.negate_flow_x_on_flip = a["negate_flow_x_on_flip"].get<bool>();

  const auto& md = m["model"];
  c.model.n_frames = c.sampling.n_frames;
  c.model.frame_size = c.data.frame_size;
  c.model.rgb_channels = md["rgb_channels"].get<std::vector<std::int64_t>>();
  c.model.flow_channels = md["flow_channels"].get<std::vector<std::int64_t>>();
  c.model.merge_channels = md["merge_channels"].get<std::vector<std::int64_t>>();
  c.model.merge_pool_t = md["merge_pool_t"].get<std::int64_t>();
  c.model.temporal_pool = md["temporal_pool"].get<std::int64_t>();
  c.model.final_pool_t = md["final_pool_t"].get<std::int64_t>();
  c.model.dropout_stages = md["dropout_stages"].get<std::int64_t>();
  c.model.spatial_dropout_p = md["spatial_dropout_p"].get<double>();
  c.model.classifier_dropout_p = md["classifier_dropout_p"].get<double>();
  c.model.fc_dims = md["fc_dims"].get<std::vector<std::int64_t>>();
  c.model.num_classes = md["num_classes"].get<std::int64_t>();

  const auto& v = m["vicreg"];
  c.vicreg.weights.lambda = v["lambda"].get<double>();
  c.vicreg.weights.mu = v["mu"].get<double>();
  c.vicreg.weights.nu = v["nu"].get<double>();
  c.vicreg.weights.gamma = v["gamma"].get<double>();
  c.vicreg.weights.eps = v["eps"].get<double>();
  c.vicreg.expander_dims = v["expander_dims"].get<std::vector<std::int64_t>>();
  c.vicreg.keep_temporal_pool = v["keep_temporal_pool"].get<bool>();
  c.vicreg.batch_size = v["batch_size"].get<std::int64_t>();
  c.vicreg.epochs = v["epochs"].get<std::int64_t>();
  c.vicreg.iterations = v["iterations"].get<std::int64_t>();
  c.vicreg.log_interval = v["log_interval"].get<std::int64_t>();
  c.vicreg.early_stopping = v["early_stopping"].get<bool>();
  c.vicreg.collapse_threshold = v["collapse_threshold"].get<double>();
  c.vicreg.collapse_patience = v["collapse_patience"].get<int>();
  c.vicreg.max_grad_norm = v["max_grad_norm"].get<double>();

  const auto& t = m["train"];
  c.train.batch_size = t["batch_size"].get<std::int64_t>();
  c.train.epochs = t["epochs"].get<std::int64_t>();
  c.train.patience = t["patience"].get<std::int64_t>();
  c.train.lr = t["lr"].get<double>();
  c.train.momentum = t["momentum"].get<double>();
  c.train.weight_decay = t["weight_decay"].get<double>();
  c.train.t_max = t["t_max"].get<std::int64_t>();
  c.train.eta_min = t["eta_min"].get<double>();
  c.train.loss = train::loss_kind_from_string(t["loss"].get<std::string>());
  c.train.precision = train::precision_from_string(t["precision"].get<std::string>());
  c.train.seed = c.seed;
  c.pretrained = t["pretrained"].get<std::string>();
  const auto inc = t["transfer"]["include"].get<std::vector<std::string>>();
  c.transfer.include = std::set<std::string>(inc.begin(), inc.end());
  c.transfer.strict_names = t["transfer"]["strict_names"].get<bool>();

  const auto& e = m["eval"];
  c.eval.threshold = e["threshold"].get<double>();
  c.eval.top_k = e["top_k"].get<std::vector<std::int64_t>>();
  c.eval.split = *data::split_from_dirname(e["split"].get<std::string>());
  c.eval.checkpoint = e["checkpoint"].get<std::string>();

  section_check("sampling", [&] { c.sampling.validate(); });
  section_check("augment", [&] { c.augment.validate(); });
  section_check("data/flow", [&] { c.data.flow.validate(); });
  section_check("model", [&] { c.model.validate(); });
  section_check("train", [&] { c.train.validate(); });
  section_check("train/transfer", [&] { c.transfer.validate(); });
  section_check("vicreg", [&] {
    c.pretrain_config().validate();
    c.expander_config().validate();
  });
  if ((c.model.num_classes == 1) != (c.train.loss == train::LossKind::Bce)) {
    fail(ErrorCode::ConfigInvalid,
         "/train/loss: bce needs model.num_classes = 1 and cross_entropy needs more than 1");
  }
  return c;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigInvalid, path.string() + ": invalid JSON: " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::ConfigInvalid, "override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  if (value.is_structured()) {
    fail(ErrorCode::ConfigInvalid, "override '" + key + "' must be a scalar");
  }
  std::string pointer;
  for (char ch : key) pointer += ch == '.' ? '/' : ch;
  const json::json_pointer ptr("/" + pointer);
  if (doc.contains(ptr) && doc[ptr].is_structured()) {
    fail(ErrorCode::ConfigInvalid, "/" + pointer + ": only scalar fields can be overridden");
  }
  doc[ptr] = value;
}

}  // namespace flowgate::cli
