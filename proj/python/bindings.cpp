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

// Python bindings. Arrays cross the boundary as float64/float32 numpy copies.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <torch/torch.h>

#include <string>
#include <vector>

#include "flowgate/cli/app.hpp"
#include "flowgate/data/sampling.hpp"
#include "flowgate/data/tensor_io.hpp"
#include "flowgate/error.hpp"
#include "flowgate/eval/metrics.hpp"
#include "flowgate/flowroi/roi.hpp"
#include "flowgate/model/accounting.hpp"
#include "flowgate/rng.hpp"
#include "flowgate/train/schedule.hpp"
#include "flowgate/vicreg/loss.hpp"

namespace py = pybind11;
using namespace flowgate;

namespace {

template <typename T>
torch::Tensor to_tensor(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  std::vector<std::int64_t> shape(a.shape(), a.shape() + a.ndim());
  auto dtype = std::is_same_v<T, double> ? torch::kFloat64 : torch::kFloat32;
  return torch::from_blob(const_cast<T*>(a.data()), shape, dtype).clone();
}

template <typename T>
py::array_t<T> to_numpy(const torch::Tensor& t) {
  auto dtype = std::is_same_v<T, double> ? torch::kFloat64 : torch::kFloat32;
  auto c = t.detach().to(dtype).contiguous();
  std::vector<py::ssize_t> shape(c.sizes().begin(), c.sizes().end());
  py::array_t<T> out(shape);
  std::memcpy(out.mutable_data(), c.template data_ptr<T>(), sizeof(T) * c.numel());
  return out;
}

using Mat = py::array_t<double, py::array::c_style | py::array::forcecast>;

vicreg::VicregWeights weights(double lambda, double mu, double nu, double gamma, double eps) {
  return {lambda, mu, nu, gamma, eps};
}

}  // namespace

PYBIND11_MODULE(_flowgate, m) {
  m.doc() = "flowgate core operations";

  static py::exception<Error> error(m, "FlowgateError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, (std::string(to_string(e.code())) + ": " + e.what()).c_str());
    }
  });

  m.def("variance_term",
        [](const Mat& z, double gamma, double eps) {
          return vicreg::variance_term(to_tensor<double>(z), weights(25, 25, 1, gamma, eps))
              .item<double>();
        },
        py::arg("z"), py::arg("gamma") = 1.0, py::arg("eps") = 1e-4);
  m.def("invariance_term", [](const Mat& z, const Mat& zp) {
    return vicreg::invariance_term(to_tensor<double>(z), to_tensor<double>(zp)).item<double>();
  });
  m.def("covariance_term", [](const Mat& z) {
    return vicreg::covariance_term(to_tensor<double>(z)).item<double>();
  });
  m.def("vicreg_loss",
        [](const Mat& z, const Mat& zp, double lambda, double mu, double nu, double gamma,
           double eps) {
          auto r = vicreg::vicreg_loss(to_tensor<double>(z), to_tensor<double>(zp),
                                       weights(lambda, mu, nu, gamma, eps));
          py::dict d;
          d["invariance"] = r.invariance;
          d["variance"] = r.variance;
          d["covariance"] = r.covariance;
          d["total"] = r.total;
          return d;
        },
        py::arg("z"), py::arg("z_prime"), py::arg("lambda_") = 25.0, py::arg("mu") = 25.0,
        py::arg("nu") = 1.0, py::arg("gamma") = 1.0, py::arg("eps") = 1e-4);

  m.def("auc", &eval::auc, py::arg("labels"), py::arg("scores"));
  m.def("binary_metrics",
        [](const std::vector<std::int64_t>& labels, const std::vector<double>& scores,
           double threshold) {
          auto cm = eval::confusion(labels, scores, threshold);
          auto j = eval::metrics(cm, labels, scores, threshold).to_json();
          return py::module_::import("json").attr("loads")(j.dump());
        },
        py::arg("labels"), py::arg("scores"), py::arg("threshold") = 0.5);
  m.def("roc_curve", [](const std::vector<std::int64_t>& labels, const std::vector<double>& scores) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : eval::roc_curve(labels, scores)) pts.emplace_back(p.fpr, p.tpr);
    return pts;
  });

  m.def("cosine_lr",
        [](double t, double lr, double eta_min, std::int64_t t_max) {
          train::TrainConfig cfg;
          cfg.lr = lr;
          cfg.eta_min = eta_min;
          cfg.t_max = t_max;
          return train::cosine_lr(t, cfg);
        },
        py::arg("t"), py::arg("lr") = 0.01, py::arg("eta_min") = 0.001, py::arg("t_max") = 30);

  m.def("model_counts",
        [](std::int64_t n_frames, std::int64_t frame_size, bool legacy) {
          auto cfg = legacy ? model::FgnConfig::legacy() : model::FgnConfig{};
          if (!legacy) cfg.n_frames = n_frames;
          cfg.frame_size = frame_size;
          model::FgnModelImpl net(cfg);
          py::dict d;
          d["params"] = model::count_params(net);
          d["macs"] = model::count_macs(net, {1, 3, cfg.n_frames, frame_size, frame_size});
          d["feature_width"] = net.feature_width(false);
          d["pooled_feature_width"] = net.feature_width(true);
          return d;
        },
        py::arg("n_frames") = 16, py::arg("frame_size") = 224, py::arg("legacy") = false);

  m.def("plan_segments",
        [](std::int64_t native_count, double native_fps, std::int64_t n_frames, double target_fps,
           std::int64_t stride) {
          data::SamplingConfig cfg{n_frames, target_fps, stride};
          std::vector<std::vector<std::int64_t>> out;
          for (const auto& w : data::plan_segments(native_count, native_fps, cfg)) {
            out.push_back(w.native_indices);
          }
          return out;
        },
        py::arg("native_count"), py::arg("native_fps"), py::arg("n_frames") = 16,
        py::arg("target_fps") = 7.5, py::arg("stride") = 16);

  m.def("write_tensor",
        [](const std::string& path,
           const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
          data::write_tensor(path, to_tensor<float>(a));
        });
  m.def("read_tensor", [](const std::string& path) { return to_numpy<float>(data::read_tensor(path)); });

  m.def("motion_intensity_map", [](const py::array_t<float, py::array::c_style | py::array::forcecast>& flow) {
    auto map = flowroi::motion_intensity_map(to_tensor<float>(flow));
    return py::make_tuple(to_numpy<double>(map.data), map.threshold);
  });
  m.def("sample_roi_center",
        [](const Mat& map, double threshold, std::uint64_t seed) {
          flowroi::IntensityMap im{to_tensor<double>(map).to(torch::kFloat32), threshold};
          Rng rng(seed);
          bool fallback = false;
          auto c = flowroi::roi_center_or_fallback(im, rng, &fallback);
          return py::make_tuple(c.cx, c.cy, fallback);
        },
        py::arg("map"), py::arg("threshold") = 0.0, py::arg("seed") = 0);

  m.def("run_cli", [](const std::vector<std::string>& args) {
    py::gil_scoped_release release;
    return cli::run(args);
  });
}
