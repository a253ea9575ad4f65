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

#include "flowgate/data/dataset.hpp"

#include <torch/torch.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>
#include <set>

#include "flowgate/data/tensor_io.hpp"
#include "flowgate/error.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace flowgate::data {
namespace {

bool is_image(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

bool is_video_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
  return ext == ".mp4" || ext == ".avi" || ext == ".mov" || ext == ".mkv" || ext == ".webm";
}

std::vector<fs::path> sorted_children(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

// cv::Mat (BGR, 8 bit) -> 3 x size x size float RGB.
torch::Tensor mat_to_frame(const cv::Mat& bgr, std::int64_t size) {
  cv::Mat resized;
  if (bgr.cols != size || bgr.rows != size) {
    cv::resize(bgr, resized, cv::Size(static_cast<int>(size), static_cast<int>(size)), 0, 0,
               cv::INTER_AREA);
  } else {
    resized = bgr;
  }
  cv::Mat rgb;
  cv::cvtColor(resized, rgb, cv::COLOR_BGR2RGB);
  cv::Mat f;
  rgb.convertTo(f, CV_32FC3, 1.0 / 255.0);
  auto t = torch::from_blob(f.data, {size, size, 3}, torch::kFloat32);
  return t.permute({2, 0, 1}).clone();
}

json record_to_json(const SegmentRecord& r) {
  json j{{"id", r.id},
         {"source_id", r.source_id},
         {"split", to_string(r.split)},
         {"start_time", r.start_time},
         {"roi", {{"cx", r.roi_cx}, {"cy", r.roi_cy}, {"fallback", r.roi_fallback}}}};
  j["label"] = r.label ? json(*r.label) : json(nullptr);
  return j;
}

SegmentRecord record_from_json(const json& j) {
  SegmentRecord r;
  r.id = j.at("id").get<std::string>();
  r.source_id = j.at("source_id").get<std::string>();
  const auto split = split_from_dirname(j.at("split").get<std::string>());
  if (!split) fail(ErrorCode::UnknownLayout, "segment " + r.id + " has an unknown split");
  r.split = *split;
  if (!j.at("label").is_null()) r.label = j.at("label").get<std::int64_t>();
  r.start_time = j.at("start_time").get<double>();
  const auto& roi = j.at("roi");
  r.roi_cx = roi.at("cx").get<double>();
  r.roi_cy = roi.at("cy").get<double>();
  r.roi_fallback = roi.at("fallback").get<bool>();
  return r;
}

}  // namespace

std::string to_string(Split s) { return s == Split::Train ? "train" : "val"; }

std::optional<Split> split_from_dirname(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val" || name == "test") return Split::Val;
  return std::nullopt;
}

std::vector<DatasetEntry> DatasetIndex::split(Split s) const {
  std::vector<DatasetEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [s](const DatasetEntry& e) { return e.split == s; });
  return out;
}

DatasetIndex load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) {
    fail(ErrorCode::UnknownLayout, root.string() + " is not a directory");
  }
  struct Raw {
    fs::path path;
    Split split;
    std::string class_name;
  };
  std::vector<Raw> raw;
  std::set<std::string> classes;
  for (const auto& split_dir : sorted_children(root)) {
    if (!fs::is_directory(split_dir)) continue;
    const auto split = split_from_dirname(split_dir.filename().string());
    if (!split) {
      fail(ErrorCode::UnknownLayout, "unexpected directory '" + split_dir.filename().string() +
                                         "' under " + root.string() +
                                         " (expected train/ or val/)");
    }
    for (const auto& class_dir : sorted_children(split_dir)) {
      if (!fs::is_directory(class_dir)) {
        fail(ErrorCode::UnknownLayout,
             "expected class directories under " + split_dir.string() + ", found file " +
                 class_dir.filename().string());
      }
      const auto class_name = class_dir.filename().string();
      classes.insert(class_name);
      for (const auto& item : sorted_children(class_dir)) {
        if (fs::is_directory(item) || is_video_file(item)) {
          raw.push_back({item, *split, class_name});
        }
      }
    }
  }
  if (raw.empty()) fail(ErrorCode::EmptyDataset, "no videos found under " + root.string());

  DatasetIndex index;
  index.class_names.assign(classes.begin(), classes.end());
  std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) { return a.path < b.path; });
  for (const auto& r : raw) {
    const auto it = std::find(index.class_names.begin(), index.class_names.end(), r.class_name);
    index.entries.push_back(
        {r.path, r.split, static_cast<std::int64_t>(it - index.class_names.begin())});
  }
  return index;
}

Clip decode_video(const fs::path& path, std::int64_t size, double default_fps) {
  std::vector<torch::Tensor> frames;
  double fps = default_fps;
  if (fs::is_directory(path)) {
    const auto meta = path / "meta.json";
    if (fs::exists(meta)) {
      std::ifstream in(meta);
      const auto j = json::parse(in);
      fps = j.value("fps", default_fps);
    }
    for (const auto& p : sorted_children(path)) {
      if (!is_image(p)) continue;
      const cv::Mat img = cv::imread(p.string(), cv::IMREAD_COLOR);
      if (img.empty()) fail(ErrorCode::IoError, "cannot decode image " + p.string());
      frames.push_back(mat_to_frame(img, size));
    }
  } else {
    cv::VideoCapture cap(path.string());
    if (!cap.isOpened()) fail(ErrorCode::IoError, "cannot open video " + path.string());
    const double native = cap.get(cv::CAP_PROP_FPS);
    if (native > 0) fps = native;
    cv::Mat img;
    while (cap.read(img)) frames.push_back(mat_to_frame(img, size));
  }
  if (frames.empty()) fail(ErrorCode::IoError, "no frames decoded from " + path.string());
  return Clip{torch::stack(frames), fps, path.filename().string()};
}

void write_frame_directory(const Clip& clip, const fs::path& dir) {
  fs::create_directories(dir);
  const auto frames = (clip.frames * 255.0).round().clamp(0, 255).to(torch::kUInt8);
  for (std::int64_t t = 0; t < clip.length(); ++t) {
    auto hwc = frames[t].permute({1, 2, 0}).contiguous();
    cv::Mat rgb(static_cast<int>(hwc.size(0)), static_cast<int>(hwc.size(1)), CV_8UC3,
                hwc.data_ptr<std::uint8_t>());
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%05lld.png", static_cast<long long>(t));
    if (!cv::imwrite((dir / name).string(), bgr)) {
      fail(ErrorCode::IoError, "cannot write " + (dir / name).string());
    }
  }
  std::ofstream(dir / "meta.json") << json{{"fps", clip.fps}, {"source_id", clip.source_id}}.dump(2);
}

void write_segment(const fs::path& dir, const SegmentRecord& record, const SegmentPair& pair) {
  fs::create_directories(dir);
  write_tensor(dir / (record.id + ".rgb.jt"), pair.rgb);
  write_tensor(dir / (record.id + ".flow.jt"), pair.flow);
  std::ofstream(dir / (record.id + ".json")) << record_to_json(record).dump(2);
}

void write_segment_index(const fs::path& dir, const std::vector<SegmentRecord>& records,
                         const std::vector<std::string>& class_names) {
  json j{{"format_version", 1}, {"class_names", class_names}, {"segments", json::array()}};
  for (const auto& r : records) j["segments"].push_back(record_to_json(r));
  const auto tmp = dir / "segments.json.tmp";
  std::ofstream(tmp) << j.dump(2);
  fs::rename(tmp, dir / "segments.json");
}

SegmentStore::SegmentStore(fs::path dir, std::optional<Split> split) : dir_(std::move(dir)) {
  const auto index = dir_ / "segments.json";
  std::ifstream in(index);
  if (!in) fail(ErrorCode::IoError, "missing segment index " + index.string());
  json j;
  try {
    j = json::parse(in);
    class_names_ = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& s : j.at("segments")) {
      auto r = record_from_json(s);
      if (!split || r.split == *split) records_.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::UnknownLayout, index.string() + ": " + e.what());
  }
}

SegmentPair SegmentStore::get(std::size_t i) const {
  const auto& r = records_.at(i);
  return SegmentPair{read_tensor(dir_ / (r.id + ".rgb.jt")),
                     read_tensor(dir_ / (r.id + ".flow.jt")), r.label, r.source_id};
}

}  // namespace flowgate::data
