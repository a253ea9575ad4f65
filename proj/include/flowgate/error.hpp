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

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowgate {

enum class ErrorCode {
  // data
  VideoTooShort,
  UnsupportedRate,
  BadMagic,
  UnsupportedVersion,
  UnsupportedDtype,
  TruncatedPayload,
  TrailingData,
  EmptyDataset,
  UnknownLayout,
  IoError,
  // flowroi
  DimMismatch,
  NoMotion,
  // model
  BadConfig,
  ShapeMismatch,
  // vicreg
  BatchTooSmall,
  // train
  OutOfRange,
  NonFiniteLoss,
  MissingGroup,
  CorruptManifest,
  TensorCountMismatch,
  // eval
  LengthMismatch,
  EmptyInput,
  SingleClass,
  // cli
  UnknownCommand,
  ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the library is reported through this type; the
// code is what callers and tests dispatch on, the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace flowgate
