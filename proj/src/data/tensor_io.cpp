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

#include "flowgate/data/tensor_io.hpp"

#include <torch/torch.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "flowgate/error.hpp"

namespace flowgate::data {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

std::size_t TensorHeader::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const torch::Tensor& tensor) {
  if (tensor.scalar_type() != torch::kFloat32) {
    fail(ErrorCode::UnsupportedDtype,
         std::string("tensor container stores float32 only, got ") +
             std::string(c10::toString(tensor.scalar_type())));
  }
  if (static_cast<std::size_t>(tensor.dim()) > kMaxRank) {
    fail(ErrorCode::BadConfig, "tensor rank " + std::to_string(tensor.dim()) +
                                   " exceeds container limit of 8");
  }
  const auto t = tensor.detach().to(torch::kCPU).contiguous();

  std::vector<std::uint8_t> out;
  out.reserve(7 + 4 * t.dim() + 4 * t.numel());
  out.insert(out.end(), std::begin(kTensorMagic), std::end(kTensorMagic));
  out.push_back(kTensorVersion);
  out.push_back(kDtypeFloat32);
  out.push_back(static_cast<std::uint8_t>(t.dim()));
  for (auto d : t.sizes()) put_u32(out, static_cast<std::uint32_t>(d));

  const auto* src = reinterpret_cast<const std::uint8_t*>(t.data_ptr<float>());
  const std::size_t nbytes = static_cast<std::size_t>(t.numel()) * 4;
  if constexpr (std::endian::native == std::endian::little) {
    out.insert(out.end(), src, src + nbytes);
  } else {
    for (std::size_t i = 0; i < nbytes; i += 4) {
      for (int b = 3; b >= 0; --b) out.push_back(src[i + b]);
    }
  }
  return out;
}

TensorHeader decode_header(const std::uint8_t* bytes, std::size_t size,
                           const std::string& name) {
  if (size < 4 || std::memcmp(bytes, kTensorMagic, 4) != 0) {
    fail(ErrorCode::BadMagic, name + ": missing JOSE magic");
  }
  if (size < 7) fail(ErrorCode::TruncatedPayload, name + ": truncated header");
  TensorHeader h;
  h.version = bytes[4];
  h.dtype = bytes[5];
  if (h.version != kTensorVersion) {
    fail(ErrorCode::UnsupportedVersion,
         name + ": container version " + std::to_string(h.version));
  }
  if (h.dtype != kDtypeFloat32) {
    fail(ErrorCode::UnsupportedDtype, name + ": dtype code " + std::to_string(h.dtype));
  }
  const std::size_t rank = bytes[6];
  if (rank > kMaxRank) fail(ErrorCode::BadConfig, name + ": rank " + std::to_string(rank));
  if (size < 7 + 4 * rank) fail(ErrorCode::TruncatedPayload, name + ": truncated shape");
  h.shape.resize(rank);
  for (std::size_t i = 0; i < rank; ++i) h.shape[i] = get_u32(bytes + 7 + 4 * i);
  return h;
}

torch::Tensor decode_tensor(const std::uint8_t* bytes, std::size_t size,
                            const std::string& name) {
  const TensorHeader h = decode_header(bytes, size, name);
  const std::size_t need = h.header_bytes() + h.payload_bytes();
  if (size < need) {
    fail(ErrorCode::TruncatedPayload, name + ": expected " + std::to_string(need) +
                                          " bytes, found " + std::to_string(size));
  }
  if (size > need) {
    fail(ErrorCode::TrailingData, name + ": " + std::to_string(size - need) +
                                      " unexpected trailing bytes");
  }
  std::vector<int64_t> shape(h.shape.begin(), h.shape.end());
  auto t = torch::empty(shape, torch::kFloat32);
  auto* dst = reinterpret_cast<std::uint8_t*>(t.data_ptr<float>());
  const std::uint8_t* src = bytes + h.header_bytes();
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src, h.payload_bytes());
  } else {
    for (std::size_t i = 0; i < h.payload_bytes(); i += 4) {
      for (int b = 0; b < 4; ++b) dst[i + b] = src[i + 3 - b];
    }
  }
  return t;
}

void write_tensor(const std::filesystem::path& path, const torch::Tensor& tensor) {
  const auto bytes = encode_tensor(tensor);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

torch::Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes.data(), bytes.size(), path.string());
}

}  // namespace flowgate::data
