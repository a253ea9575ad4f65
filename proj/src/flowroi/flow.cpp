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

#include "flowgate/flowroi/flow.hpp"

#include <torch/torch.h>

#include <opencv2/video/tracking.hpp>

#include "flowgate/error.hpp"

namespace flowgate::flowroi {
namespace {

cv::Mat to_u8(const torch::Tensor& gray) {
  auto t = (gray * 255.0).round().clamp(0, 255).to(torch::kUInt8).contiguous();
  cv::Mat m(static_cast<int>(t.size(0)), static_cast<int>(t.size(1)), CV_8UC1,
            t.data_ptr<std::uint8_t>());
  return m.clone();
}

}  // namespace

void FarnebackParams::validate() const {
  if (levels < 1) fail(ErrorCode::BadConfig, "farneback levels must be >= 1");
  if (window_size < 1 || window_size % 2 == 0) {
    fail(ErrorCode::BadConfig, "farneback window size must be odd");
  }
  if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) {
    fail(ErrorCode::BadConfig, "farneback pyramid scale must lie in (0, 1)");
  }
  if (iterations < 1) fail(ErrorCode::BadConfig, "farneback iterations must be >= 1");
}

torch::Tensor to_gray(const torch::Tensor& rgb) {
  return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
}

FlowField farneback_flow(const torch::Tensor& prev, const torch::Tensor& next,
                         const FarnebackParams& params) {
  params.validate();
  if (prev.dim() != 2 || next.dim() != 2) {
    fail(ErrorCode::DimMismatch, "farneback_flow expects single-channel H x W frames");
  }
  if (prev.sizes() != next.sizes()) {
    fail(ErrorCode::DimMismatch, "frame sizes differ: " + std::to_string(prev.size(0)) + "x" +
                                     std::to_string(prev.size(1)) + " vs " +
                                     std::to_string(next.size(0)) + "x" +
                                     std::to_string(next.size(1)));
  }
  const cv::Mat a = to_u8(prev);
  const cv::Mat b = to_u8(next);
  cv::Mat flow;
  cv::calcOpticalFlowFarneback(a, b, flow, params.pyramid_scale, params.levels,
                               params.window_size, params.iterations, params.poly_n,
                               params.poly_sigma, 0);
  auto hw2 = torch::from_blob(flow.data, {flow.rows, flow.cols, 2}, torch::kFloat32);
  return hw2.permute({2, 0, 1}).clone();
}

FlowProvider farneback_provider(FarnebackParams params) {
  params.validate();
  return [params](const torch::Tensor& prev, const torch::Tensor& next) {
    return farneback_flow(prev, next, params);
  };
}

torch::Tensor compute_flow_segment(const data::RawSegment& raw, const FlowProvider& provider) {
  const auto& f = raw.frames;
  if (f.dim() != 4 || f.size(1) != 3 || f.size(0) < 2) {
    fail(ErrorCode::ShapeMismatch, "raw segment must be (N+1) x 3 x H x W");
  }
  const auto n = f.size(0) - 1;
  auto out = torch::empty({2, n, f.size(2), f.size(3)}, torch::kFloat32);
  auto prev = to_gray(f[0]);
  for (std::int64_t i = 0; i < n; ++i) {
    auto next = to_gray(f[i + 1]);
    const auto field = provider(prev, next);
    if (field.dim() != 3 || field.size(0) != 2 || field.size(1) != f.size(2) ||
        field.size(2) != f.size(3)) {
      fail(ErrorCode::DimMismatch, "flow provider returned a field of the wrong shape");
    }
    out.select(1, i).copy_(field);
    prev = next;
  }
  return out;
}

torch::Tensor compute_flow_segment(const data::RawSegment& raw, const FarnebackParams& params) {
  return compute_flow_segment(raw, farneback_provider(params));
}

}  // namespace flowgate::flowroi
