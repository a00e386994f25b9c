// Copyright 2026 The vaecomp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The four reference MNIST classifiers whose parameter sets are compressed.
//
// Canonical block order (also the flattening order):
//   FNN   fc1..fc5, each weight [in,out] then bias [out]
//         784-200-100-60-30-10, ReLU on hidden layers
//   CNN   conv1 [4,1,5,5] same pad -> ReLU -> maxpool2      (4x28x28 -> 4x14x14)
//         conv2 [8,4,5,5] same pad -> ReLU -> maxpool2      (8x14x14 -> 8x7x7)
//         conv3 [12,8,4,4] pad 1/2 -> ReLU                  (12x7x7 = 588)
//         fc1 588->200 ReLU, fc2 200->10
//   RNN   rnn1 (28->128), rnn2 (128->128): w_ih, w_hh, b_ih, b_hh; tanh
//         fc 128->10 on the last hidden state
//   LSTM  lstm1, lstm2 with the same block names, gate slabs i,f,g,o
//         fc 128->10 on the last hidden state
// Recurrent models read the image one row per step (28 steps x 28 features).

#ifndef VAECOMP_BASE_MODELS_HPP_
#define VAECOMP_BASE_MODELS_HPP_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vaecomp/layers.hpp"
#include "vaecomp/mnist.hpp"
#include "vaecomp/param_set.hpp"

namespace vaecomp {

struct BlockSpec {
  std::string name;
  Shape shape;
};

struct BaseModelSpec {
  ModelKind kind = ModelKind::kFnn;
  std::vector<BlockSpec> blocks;
  // Neurons per stage, as listed for the model family.
  std::vector<std::size_t> stage_sizes;

  std::size_t parameter_count() const;
};

inline constexpr std::size_t kFnnParams = 185'300;
inline constexpr std::size_t kCnnParams = 122'270;
inline constexpr std::size_t kRnnParams = 54'538;
inline constexpr std::size_t kLstmParams = 214'282;

std::size_t reference_parameter_count(ModelKind kind);
const std::vector<ModelKind>& base_kinds();

BaseModelSpec model_spec(ModelKind kind);

struct BuiltModel {
  BaseModelSpec spec;
  ParamSet params;
};

// Architecture plus freshly initialized parameters: weights and biases drawn
// from U(-1/sqrt(fan_in), 1/sqrt(fan_in)); recurrent blocks use fan_in = hidden.
BuiltModel build_model(ModelKind kind, std::uint64_t seed);

// Throws ShapeError unless `params` has exactly the blocks of `spec`.
void check_params(const BaseModelSpec& spec, const ParamSet& params);

// Forward/backward graph of one base model, bound to block indices of its spec.
class Classifier {
 public:
  explicit Classifier(const BaseModelSpec& spec);

  // images [batch, 28, 28] -> logits [batch, 10]
  Tensor forward(const ParamSet& params, const Tensor& images);
  void backward(const ParamSet& params, const Tensor& grad_logits,
                Gradients& grads);

 private:
  Shape input_shape_;
  Sequential net_;
};

struct BaseTrainConfig {
  std::size_t max_epochs = 10;
  std::size_t batch_size = 64;
  float learning_rate = 1e-3f;
  std::size_t validation_size = 5000;
  // Stop after this many epochs without a validation-accuracy gain.
  std::size_t patience = 2;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
};

struct BaseEpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct BaseTrainResult {
  ParamSet params;  // best validation accuracy
  std::vector<BaseEpochMetrics> history;
  std::size_t best_epoch = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, std::size_t epoch)
      : std::runtime_error(what + " at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

using BaseEpochCallback = std::function<void(const BaseEpochMetrics&)>;

// Holds out `validation_size` shuffled training images and trains with Adam.
BaseTrainResult train_base(const BaseModelSpec& spec, ParamSet params,
                           const MnistDataset& train,
                           const BaseTrainConfig& config,
                           const BaseEpochCallback& on_epoch = {});

struct EvalResult {
  double accuracy = 0.0;
  double loss = 0.0;
  std::vector<std::size_t> class_total;    // per label
  std::vector<std::size_t> class_correct;  // per label
  std::size_t correct = 0;
  std::size_t total = 0;
};

EvalResult evaluate(const BaseModelSpec& spec, const ParamSet& params,
                    const MnistDataset& test);
double evaluate_accuracy(const BaseModelSpec& spec, const ParamSet& params,
                         const MnistDataset& test);

}  // namespace vaecomp

#endif  // VAECOMP_BASE_MODELS_HPP_
