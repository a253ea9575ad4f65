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

#include "flowgate/cli/app.hpp"

#include <torch/torch.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "flowgate/cli/config.hpp"
#include "flowgate/data/dataset.hpp"
#include "flowgate/error.hpp"
#include "flowgate/eval/metrics.hpp"
#include "flowgate/flowroi/pipeline.hpp"
#include "flowgate/log.hpp"
#include "flowgate/model/accounting.hpp"
#include "flowgate/rng.hpp"
#include "flowgate/train/checkpoint.hpp"
#include "flowgate/train/pretrain.hpp"
#include "flowgate/train/trainer.hpp"
#include "flowgate/train/transfer.hpp"
#include "flowgate/vicreg/ssl_model.hpp"

namespace flowgate::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr const char* kSynthMarker = ".flowgate-synthetic";
constexpr const char* kSegmentIndex = "segments.json";
constexpr std::uint64_t kSynthTag = 0x53594e;
constexpr std::uint64_t kRoiTag = 0x524f49;

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  return json::parse(in);
}

// Generated directories are replaced wholesale, but only when they are empty
// or carry `marker`.
fs::path begin_replace(const fs::path& dir, const char* marker) {
  if (fs::exists(dir) && !fs::is_empty(dir) && !fs::exists(dir / marker)) {
    fail(ErrorCode::IoError, dir.string() + " exists and was not produced by this tool");
  }
  const fs::path tmp = dir.string() + ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  return tmp;
}

void commit_replace(const fs::path& tmp, const fs::path& dir) {
  fs::remove_all(dir);
  if (dir.has_parent_path()) fs::create_directories(dir.parent_path());
  fs::rename(tmp, dir);
}

std::string class_dir(data::ClipClass c) { return c == data::ClipClass::Motion ? "motion" : "idle"; }

int synth_data(const ExperimentConfig& c) {
  const auto tmp = begin_replace(c.data.root, kSynthMarker);
  std::ofstream(tmp / kSynthMarker) << "generated\n";
  const struct {
    const char* split;
    std::int64_t count;
  } splits[] = {{"train", c.data.synthetic.train_clips}, {"val", c.data.synthetic.val_clips}};
  std::int64_t written = 0;
  for (std::uint64_t s = 0; s < 2; ++s) {
    for (std::int64_t i = 0; i < splits[s].count; ++i) {
      auto spec = c.data.synthetic.spec;
      spec.clip_class = i % 2 == 0 ? data::ClipClass::Motion : data::ClipClass::Static;
      const auto seed = derive_seed(c.seed, {kSynthTag, s, static_cast<std::uint64_t>(i)});
      auto clip = data::generate_synthetic_clip(spec, seed, c.sampling.raw_frames_per_segment());
      char name[32];
      std::snprintf(name, sizeof name, "clip_%04lld", static_cast<long long>(i));
      data::write_frame_directory(clip, tmp / splits[s].split / class_dir(spec.clip_class) / name);
      ++written;
    }
  }
  commit_replace(tmp, c.data.root);
  log_event(LogLevel::Info, "synth_data", {{"clips", written}, {"root", c.data.root.string()}});
  return kExitOk;
}

int preprocess(const ExperimentConfig& c) {
  const auto index = data::load_dataset(c.data.root);
  const auto tmp = begin_replace(c.data.segments, kSegmentIndex);
  const auto provider = flowroi::farneback_provider(c.data.flow);
  std::vector<data::SegmentRecord> records;
  std::int64_t fallbacks = 0;
  for (std::size_t i = 0; i < index.entries.size(); ++i) {
    const auto& entry = index.entries[i];
    auto clip = data::decode_video(entry.path, c.data.frame_size, c.data.default_fps);
    const auto seed = derive_seed(c.seed, {kRoiTag, i});
    auto segs = flowroi::prepare_segments(clip, c.sampling, provider, seed, entry.class_id);
    const std::string stem = data::to_string(entry.split) + "_" +
                             index.class_names[entry.class_id] + "_" +
                             entry.path.filename().string();
    for (std::size_t k = 0; k < segs.size(); ++k) {
      data::SegmentRecord r;
      r.id = stem + "_" + std::to_string(k);
      r.source_id = entry.path.string();
      r.split = entry.split;
      r.label = entry.class_id;
      r.start_time = segs[k].start_time;
      r.roi_cx = segs[k].center.cx;
      r.roi_cy = segs[k].center.cy;
      r.roi_fallback = segs[k].fallback;
      fallbacks += r.roi_fallback;
      data::write_segment(tmp, r, segs[k].pair);
      records.push_back(std::move(r));
    }
  }
  data::write_segment_index(tmp, records, index.class_names);
  commit_replace(tmp, c.data.segments);
  log_event(LogLevel::Info, "preprocess",
            {{"clips", index.entries.size()}, {"segments", records.size()},
             {"roi_fallbacks", fallbacks}});
  return kExitOk;
}

void fit(model::FgnModelImpl& net, const ExperimentConfig& c, const json& extra) {
  data::SegmentStore train_set(c.data.segments, data::Split::Train);
  data::SegmentStore val_set(c.data.segments, data::Split::Val);
  train::TrainHooks hooks;
  hooks.dump_dir = c.output_dir;
  auto history = train::train_supervised(net, train_set, val_set, c.train, c.augment, hooks);
  history.write_jsonl(c.output_dir / "history.jsonl");
  json meta = extra;
  meta["kind"] = "fgn";
  meta["best_epoch"] = history.best_epoch;
  meta["stop_reason"] = history.stop_reason;
  meta["epochs_run"] = history.epochs.size();
  train::save_checkpoint(net, c.output_dir / "model", c.to_json(), meta);
  log_event(LogLevel::Info, "train_done", meta);
}

int train_cmd(const ExperimentConfig& c) {
  auto net = model::build_fgn(c.model, c.seed);
  fit(*net, c, json::object());
  return kExitOk;
}

int finetune_cmd(const ExperimentConfig& c) {
  const fs::path src = c.pretrained.empty() ? c.output_dir / "ssl" : c.pretrained;
  const auto ckpt = train::load_checkpoint(src);
  auto net = model::build_fgn(c.model, c.seed);
  const auto report = train::transfer_weights(*net, ckpt, c.transfer);
  write_json(c.output_dir / "transfer_report.json",
             {{"source", src.string()}, {"copied", report.copied}, {"skipped", report.skipped}});
  fit(*net, c,
      {{"pretrained", src.string()},
       {"transferred", std::vector<std::string>(c.transfer.include.begin(), c.transfer.include.end())}});
  return kExitOk;
}

int pretrain_cmd(const ExperimentConfig& c) {
  auto ssl = vicreg::build_ssl_model(c.model, c.expander_config(), c.seed,
                                     c.vicreg.keep_temporal_pool);
  data::SegmentStore unlabeled(c.data.segments, data::Split::Train);
  fs::create_directories(c.output_dir);
  std::ofstream log(c.output_dir / "pretrain_log.jsonl");
  auto result = train::pretrain_vicreg(*ssl, unlabeled, c.pretrain_config(), c.augment,
                                       [&](const train::PretrainLogEntry& e) {
                                         log << e.to_json().dump() << '\n';
                                       });
  auto summary = result.summary();
  summary["kind"] = "vicreg";
  summary["keep_temporal_pool"] = c.vicreg.keep_temporal_pool;
  train::save_checkpoint(*ssl, c.output_dir / "ssl", c.to_json(), summary);
  write_json(c.output_dir / "pretrain_summary.json", summary);
  return kExitOk;
}

int eval_cmd(const ExperimentConfig& c) {
  const fs::path src = c.eval.checkpoint.empty() ? c.output_dir / "model" : c.eval.checkpoint;
  auto net = model::build_fgn(c.model, c.seed);
  train::load_state(*net, train::load_checkpoint(src).tensors);
  data::SegmentStore source(c.data.segments, c.eval.split);
  auto preds = train::predict(*net, source, c.train.batch_size, c.train.loss);
  const fs::path dir = c.output_dir / "eval";
  json summary;
  if (c.model.num_classes == 1) {
    const auto cm = eval::confusion(preds.labels, preds.scores, c.eval.threshold);
    const auto report = eval::metrics(cm, preds.labels, preds.scores, c.eval.threshold);
    eval::emit_report(report, dir);
    summary = report.to_json();
  } else {
    auto probs = preds.probs.contiguous();
    std::vector<std::vector<double>> rows;
    for (std::int64_t i = 0; i < probs.size(0); ++i) {
      auto r = probs[i];
      rows.emplace_back(r.data_ptr<double>(), r.data_ptr<double>() + r.numel());
    }
    summary = {{"n", rows.size()}};
    for (auto k : c.eval.top_k) {
      summary["top" + std::to_string(k) + "_accuracy"] = eval::top_k_accuracy(rows, preds.labels, k);
    }
    write_json(dir / "metrics.json", summary);
  }
  std::cout << summary.dump() << std::endl;
  return kExitOk;
}

int count_cmd(const ExperimentConfig& c) {
  model::FgnModelImpl net(c.model);
  json out = {{"params", model::count_params(net)},
              {"macs", model::count_macs(net, {1, 3, c.model.n_frames, c.model.frame_size,
                                               c.model.frame_size})},
              {"n_frames", c.model.n_frames},
              {"frame_size", c.model.frame_size},
              {"feature_width", net.feature_width(false)},
              {"pooled_feature_width", net.feature_width(true)}};
  write_json(c.output_dir / "count.json", out);
  std::cout << out.dump() << std::endl;
  return kExitOk;
}

int report_cmd(const ExperimentConfig& c) {
  const auto& out = c.output_dir;
  json summary = json::object();
  std::ostringstream md;
  md << "# Run report\n\n";
  if (fs::exists(out / "pretrain_summary.json")) {
    summary["pretrain"] = read_json(out / "pretrain_summary.json");
    const auto& p = summary["pretrain"];
    md << "## Pretraining\n\n"
       << "- iterations: " << p["iterations"] << "\n"
       << "- first loss: " << p["first_loss"] << "\n"
       << "- last loss: " << p["last_loss"] << "\n"
       << "- collapse detected: " << p["collapse_detected"] << "\n\n";
  }
  if (fs::exists(out / "history.jsonl")) {
    std::ifstream in(out / "history.jsonl");
    json epochs = json::array();
    json tail;
    for (std::string line; std::getline(in, line);) {
      if (line.empty()) continue;
      auto j = json::parse(line);
      (j.contains("epoch") ? epochs.push_back(j) : void(tail = j));
    }
    summary["history"] = {{"epochs", epochs}, {"summary", tail}};
    md << "## Training\n\n| epoch | train loss | val loss | val accuracy | lr |\n"
       << "|---|---|---|---|---|\n";
    for (const auto& e : epochs) {
      md << "| " << e["epoch"] << " | " << e["train_loss"] << " | " << e["val_loss"] << " | "
         << e["val_accuracy"] << " | " << e["lr"] << " |\n";
    }
    md << "\nbest epoch: " << tail.value("best_epoch", json(-1)) << ", stop reason: "
       << tail.value("stop_reason", json("")) << "\n\n";
  }
  if (fs::exists(out / "eval" / "metrics.json")) {
    summary["eval"] = read_json(out / "eval" / "metrics.json");
    md << "## Evaluation\n\n";
    for (const auto& [k, v] : summary["eval"].items()) md << "- " << k << ": " << v << "\n";
    if (fs::exists(out / "eval" / "roc.png")) md << "\n![ROC](eval/roc.png)\n";
    if (fs::exists(out / "eval" / "confusion.png")) md << "![Confusion](eval/confusion.png)\n";
  }
  if (summary.empty()) fail(ErrorCode::IoError, "nothing to report in " + out.string());
  write_json(out / "summary.json", summary);
  std::ofstream(out / "report.md") << md.str();
  return kExitOk;
}

bool is_validation_error(ErrorCode code) {
  return code == ErrorCode::ConfigInvalid || code == ErrorCode::BadConfig ||
         code == ErrorCode::UnknownCommand;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"flowgate: flow-gated video classification experiments"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::string log_level = "info";
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"synth-data", "generate the synthetic motion-vs-idle video set"},
      {"preprocess", "decode videos, estimate flow, crop ROIs, write segments"},
      {"pretrain", "self-supervised pretraining of the joint-stream model"},
      {"train", "supervised training from scratch"},
      {"finetune", "supervised training from pretrained weights"},
      {"eval", "metrics and plots on a segment split"},
      {"count", "parameter and multiply-accumulate counts"},
      {"report", "summarize the artifacts of an output directory"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config,-c", config_path, "experiment JSON");
    sub->add_option("--out,-o", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--set", overrides, "scalar override, key.path=value");
    sub->add_option("--log-level", log_level, "debug|info|warn|error|off");
  }

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const std::string msg = e.get_name() == "RequiredError" || e.get_name() == "ExtrasError"
                                ? std::string(to_string(ErrorCode::UnknownCommand)) + ": " + e.what()
                                : e.what();
    log_event(LogLevel::Error, "usage", {{"message", msg}});
    return kExitInvalid;
  }
  const auto* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();

  static const std::map<std::string, LogLevel> levels = {
      {"debug", LogLevel::Debug}, {"info", LogLevel::Info}, {"warn", LogLevel::Warn},
      {"error", LogLevel::Error}, {"off", LogLevel::Off}};
  if (!levels.count(log_level)) {
    log_event(LogLevel::Error, "usage", {{"message", "unknown log level " + log_level}});
    return kExitInvalid;
  }
  log_threshold() = levels.at(log_level);

  ExperimentConfig cfg;
  try {
    json doc = config_path.empty() ? json::object() : read_config_file(config_path);
    for (const auto& o : overrides) apply_override(doc, o);
    if (!out_dir.empty()) doc["output"]["dir"] = out_dir;
    cfg = parse_config(doc);
  } catch (const Error& e) {
    log_event(LogLevel::Error, "invalid_config",
              {{"command", command}, {"code", to_string(e.code())}, {"message", e.what()}});
    return kExitInvalid;
  } catch (const std::exception& e) {
    log_event(LogLevel::Error, "invalid_config", {{"command", command}, {"message", e.what()}});
    return kExitInvalid;
  }

  try {
    torch::manual_seed(cfg.seed);
    write_json(cfg.output_dir / "resolved_config.json", cfg.to_json());
    log_event(LogLevel::Info, "start", {{"command", command}, {"out", cfg.output_dir.string()}});
    int rc = kExitOk;
    if (command == "synth-data") rc = synth_data(cfg);
    else if (command == "preprocess") rc = preprocess(cfg);
    else if (command == "pretrain") rc = pretrain_cmd(cfg);
    else if (command == "train") rc = train_cmd(cfg);
    else if (command == "finetune") rc = finetune_cmd(cfg);
    else if (command == "eval") rc = eval_cmd(cfg);
    else if (command == "count") rc = count_cmd(cfg);
    else if (command == "report") rc = report_cmd(cfg);
    else fail(ErrorCode::UnknownCommand, command);
    log_event(LogLevel::Info, "done", {{"command", command}});
    return rc;
  } catch (const Error& e) {
    log_event(LogLevel::Error, "failed",
              {{"command", command}, {"code", to_string(e.code())}, {"message", e.what()}});
    return is_validation_error(e.code()) ? kExitInvalid : kExitRuntime;
  } catch (const std::exception& e) {
    log_event(LogLevel::Error, "failed", {{"command", command}, {"message", e.what()}});
    return kExitRuntime;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace flowgate::cli
