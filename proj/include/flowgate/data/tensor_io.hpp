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

// Binary tensor container.
//
// Layout (all integers little-endian):
//
//   offset  size        field
//   0       4           magic "JOSE"
//   4       1           version (1)
//   5       1           dtype code (0 = float32 LE)
//   6       1           rank r (<= 8)
//   7       4*r         shape, uint32 each
//   7+4r    4*numel     payload, row-major
//
// A 2x2 tensor therefore occupies 7 + 8 + 16 = 31 bytes.

#pragma once

#include <torch/types.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace flowgate::data {

inline constexpr char kTensorMagic[4] = {'J', 'O', 'S', 'E'};
inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;
inline constexpr std::size_t kMaxRank = 8;

struct TensorHeader {
  std::uint8_t version = kTensorVersion;
  std::uint8_t dtype = kDtypeFloat32;
  std::vector<std::uint32_t> shape;

  std::size_t numel() const;
  std::size_t header_bytes() const { return 7 + 4 * shape.size(); }
  std::size_t payload_bytes() const { return numel() * 4; }
};

std::vector<std::uint8_t> encode_tensor(const torch::Tensor& tensor);

// `name` is only used to label errors (typically the file path).
torch::Tensor decode_tensor(const std::uint8_t* bytes, std::size_t size,
                            const std::string& name = "<buffer>");

TensorHeader decode_header(const std::uint8_t* bytes, std::size_t size,
                           const std::string& name = "<buffer>");

// Writes through a temporary file and renames it into place.
void write_tensor(const std::filesystem::path& path, const torch::Tensor& tensor);
torch::Tensor read_tensor(const std::filesystem::path& path);

}  // namespace flowgate::data
