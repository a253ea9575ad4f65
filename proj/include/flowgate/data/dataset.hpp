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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "flowgate/data/sampling.hpp"

namespace flowgate::data {

enum class Split { Train, Val };

std::string to_string(Split s);
std::optional<Split> split_from_dirname(const std::string& name);

struct DatasetEntry {
  std::filesystem::path path;  // video file or directory of frame images
  Split split = Split::Train;
  std::int64_t class_id = 0;
};

struct DatasetIndex {
  std::vector<DatasetEntry> entries;
  std::vector<std::string> class_names;

  std::vector<DatasetEntry> split(Split s) const;
};

// Scans <root>/<split>/<ClassName>/<video>. Split directories are "train" and
// "val" ("test" is read as val). Entries are sorted lexicographically by path;
// class ids follow the sorted class names.
DatasetIndex load_dataset(const std::filesystem::path& root);

// Pluggable decoder: returns frames resized to size x size, values in [0, 1].
using VideoDecoder =
    std::function<Clip(const std::filesystem::path&, std::int64_t size, double default_fps)>;

// Default decoder. Directories are read as sorted frame images (png/jpg/bmp);
// an optional meta.json {"fps": ...} in that directory sets the native rate.
// Anything else goes through OpenCV's video backend.
Clip decode_video(const std::filesystem::path& path, std::int64_t size, double default_fps);

// Writes a clip as a directory of PNG frames plus meta.json.
void write_frame_directory(const Clip& clip, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Preprocessed segments on disk: <dir>/<id>.rgb.jt, <id>.flow.jt, <id>.json,
// and an index file <dir>/segments.json listing every record.

struct SegmentRecord {
  std::string id;
  std::string source_id;
  Split split = Split::Train;
  std::optional<std::int64_t> label;
  double start_time = 0.0;
  double roi_cx = 0.0;
  double roi_cy = 0.0;
  bool roi_fallback = false;
};

void write_segment(const std::filesystem::path& dir, const SegmentRecord& record,
                   const SegmentPair& pair);
void write_segment_index(const std::filesystem::path& dir,
                         const std::vector<SegmentRecord>& records,
                         const std::vector<std::string>& class_names);

// Random-access source of segment pairs; the trainer's only view of data.
class SegmentSource {
 public:
  virtual ~SegmentSource() = default;
  virtual std::size_t size() const = 0;
  virtual SegmentPair get(std::size_t i) const = 0;
};

class SegmentStore final : public SegmentSource {
 public:
  // Loads <dir>/segments.json; `split` filters records when given.
  explicit SegmentStore(std::filesystem::path dir, std::optional<Split> split = std::nullopt);

  std::size_t size() const override { return records_.size(); }
  SegmentPair get(std::size_t i) const override;
  const SegmentRecord& record(std::size_t i) const { return records_.at(i); }
  const std::vector<std::string>& class_names() const { return class_names_; }

 private:
  std::filesystem::path dir_;
  std::vector<SegmentRecord> records_;
  std::vector<std::string> class_names_;
};

class InMemorySegments final : public SegmentSource {
 public:
  InMemorySegments() = default;
  explicit InMemorySegments(std::vector<SegmentPair> pairs) : pairs_(std::move(pairs)) {}

  void push_back(SegmentPair pair) { pairs_.push_back(std::move(pair)); }
  std::size_t size() const override { return pairs_.size(); }
  SegmentPair get(std::size_t i) const override { return pairs_.at(i); }

 private:
  std::vector<SegmentPair> pairs_;
};

}  // namespace flowgate::data
