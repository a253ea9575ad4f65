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

// JSON-lines event log on stderr.

#pragma once

#include <atomic>
#include <iostream>
#include <mutex>
#include <string>

#include <json.hpp>

namespace flowgate {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

inline std::atomic<LogLevel>& log_threshold() {
  static std::atomic<LogLevel> level{LogLevel::Info};
  return level;
}

inline const char* to_string(LogLevel l) {
  switch (l) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    case LogLevel::Off: break;
  }
  return "off";
}

inline void log_event(LogLevel level, const std::string& event, nlohmann::json fields = {}) {
  if (level < log_threshold().load()) return;
  static std::mutex mu;
  nlohmann::json line = fields.is_object() ? std::move(fields) : nlohmann::json::object();
  line["level"] = to_string(level);
  line["event"] = event;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << line.dump() << '\n';
}

}  // namespace flowgate
