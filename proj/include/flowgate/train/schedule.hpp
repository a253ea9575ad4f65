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

// Optimisation settings, the cosine learning-rate schedule and early stopping.

#pragma once

#include <torch/nn/module.h>
#include <torch/optim/sgd.h>

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace flowgate::train {

enum class LossKind { Bce, CrossEntropy, Vicreg };
enum class Precision { Full, Mixed };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);
std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

struct TrainConfig {
  std::int64_t batch_size = 32;
  std::int64_t epochs = 30;
  std::int64_t patience = 15;
  double lr = 0.01;
  double momentum = 0.9;
  double weight_decay = 1e-6;
  std::int64_t t_max = 30;
  double eta_min = 0.001;
  LossKind loss = LossKind::Bce;
  std::uint64_t seed = 0;
  Precision precision = Precision::Full;

  void validate() const;
};

// eta_min + (lr - eta_min) (1 + cos(pi t / t_max)) / 2 for 0 <= t <= t_max.
double cosine_lr(double t, const TrainConfig& cfg);

// Names of parameters that receive weight decay: the weights of convolutions
// and linear layers. Biases and normalization parameters are excluded.
std::vector<std::string> decayed_parameters(const torch::nn::Module& module);
std::vector<std::string> undecayed_parameters(const torch::nn::Module& module);

// SGD with momentum; group 0 carries weight decay, group 1 does not.
std::unique_ptr<torch::optim::SGD> make_sgd(torch::nn::Module& module, const TrainConfig& cfg);
void set_learning_rate(torch::optim::Optimizer& opt, double lr);

// Minimisation monitor.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::int64_t patience) : patience_(patience) {}

  // Returns true when `value` improves on the best seen so far.
  bool observe(std::int64_t epoch, double value);
  bool should_stop() const { return bad_epochs_ >= patience_; }
  std::int64_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }

 private:
  std::int64_t patience_;
  std::int64_t bad_epochs_ = 0;
  std::int64_t best_epoch_ = -1;
  double best_ = std::numeric_limits<double>::infinity();
};

}  // namespace flowgate::train
