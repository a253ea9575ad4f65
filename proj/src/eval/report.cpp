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

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "flowgate/error.hpp"
#include "flowgate/eval/metrics.hpp"

namespace flowgate::eval {
namespace {

namespace fs = std::filesystem;

constexpr int kCanvas = 480;
constexpr int kMargin = 60;

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << text;
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_image(const fs::path& path, const cv::Mat& img) {
  if (!cv::imwrite(path.string(), img)) fail(ErrorCode::IoError, "cannot write " + path.string());
}

std::string fmt(double v, int digits = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

cv::Mat render_roc(const MetricsReport& r) {
  cv::Mat img(kCanvas, kCanvas, CV_8UC3, cv::Scalar(255, 255, 255));
  const int span = kCanvas - 2 * kMargin;
  auto to_px = [&](double fpr, double tpr) {
    return cv::Point(kMargin + static_cast<int>(fpr * span),
                     kCanvas - kMargin - static_cast<int>(tpr * span));
  };
  cv::rectangle(img, to_px(0, 1), to_px(1, 0), cv::Scalar(0, 0, 0), 1);
  cv::line(img, to_px(0, 0), to_px(1, 1), cv::Scalar(180, 180, 180), 1, cv::LINE_AA);
  for (std::size_t i = 1; i < r.roc.size(); ++i) {
    cv::line(img, to_px(r.roc[i - 1].fpr, r.roc[i - 1].tpr), to_px(r.roc[i].fpr, r.roc[i].tpr),
             cv::Scalar(200, 80, 20), 2, cv::LINE_AA);
  }
  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  cv::putText(img, "false positive rate", {kCanvas / 2 - 80, kCanvas - 20}, font, 0.5, {0, 0, 0});
  cv::putText(img, "true positive rate", {8, kMargin - 20}, font, 0.5, {0, 0, 0});
  const std::string title = r.auc ? "ROC  AUC = " + fmt(*r.auc) : "ROC  AUC undefined";
  cv::putText(img, title, {kCanvas / 2 - 60, kMargin - 20}, font, 0.55, {0, 0, 0});
  return img;
}

cv::Mat render_confusion(const MetricsReport& r) {
  cv::Mat img(kCanvas, kCanvas, CV_8UC3, cv::Scalar(255, 255, 255));
  const auto& c = r.confusion;
  // Rows: true class (negative, positive); columns: predicted class. Each row
  // is normalized by its class size.
  const double counts[2][2] = {{static_cast<double>(c.tn), static_cast<double>(c.fp)},
                               {static_cast<double>(c.fn), static_cast<double>(c.tp)}};
  const int cell = (kCanvas - 2 * kMargin) / 2;
  const auto font = cv::FONT_HERSHEY_SIMPLEX;
  for (int i = 0; i < 2; ++i) {
    const double row = counts[i][0] + counts[i][1];
    for (int j = 0; j < 2; ++j) {
      const double frac = row > 0 ? counts[i][j] / row : 0.0;
      const int shade = 255 - static_cast<int>(frac * 200);
      cv::Rect box(kMargin + j * cell, kMargin + i * cell, cell, cell);
      cv::rectangle(img, box, cv::Scalar(255, shade, shade), cv::FILLED);
      cv::rectangle(img, box, cv::Scalar(0, 0, 0), 1);
      cv::putText(img, fmt(frac, 2), {box.x + cell / 2 - 25, box.y + cell / 2 + 8}, font, 0.8,
                  {0, 0, 0}, 2);
    }
  }
  cv::putText(img, "predicted: negative  positive", {kMargin + 20, kMargin - 20}, font, 0.5,
              {0, 0, 0});
  cv::putText(img, "true neg", {4, kMargin + cell / 2}, font, 0.45, {0, 0, 0});
  cv::putText(img, "true pos", {4, kMargin + 3 * cell / 2}, font, 0.45, {0, 0, 0});
  return img;
}

}  // namespace

void emit_report(const MetricsReport& report, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "metrics.json", report.to_json().dump(2) + "\n");
  std::string csv = "fpr,tpr\n";
  for (const auto& p : report.roc) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.fpr, p.tpr);
    csv += buf;
  }
  write_text(dir / "roc.csv", csv);
  write_image(dir / "roc.png", render_roc(report));
  write_image(dir / "confusion.png", render_confusion(report));
}

}  // namespace flowgate::eval
