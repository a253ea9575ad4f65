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

#include "flowgate/error.hpp"

namespace flowgate {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::VideoTooShort: return "VideoTooShort";
    case ErrorCode::UnsupportedRate: return "UnsupportedRate";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::UnknownLayout: return "UnknownLayout";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NoMotion: return "NoMotion";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::MissingGroup: return "MissingGroup";
    case ErrorCode::CorruptManifest: return "CorruptManifest";
    case ErrorCode::TensorCountMismatch: return "TensorCountMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace flowgate
