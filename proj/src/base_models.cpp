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

#include "vaecomp/base_models.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "vaecomp/loss.hpp"
#include "vaecomp/optimizer.hpp"
#include "vaecomp/recurrent.hpp"

namespace vaecomp {

namespace {

constexpr std::size_t kHidden = 128;

void add_dense(std::vector<BlockSpec>& blocks, const std::string& name,
               std::size_t in, std::size_t out) {
  blocks.push_back({name + ".weight", {in, out}});
  blocks.push_back({name + ".bias", {out}});
}

void add_recurrent(std::vector<BlockSpec>& blocks, const std::string& name,
                   std::size_t in, std::size_t hid, bool lstm) {
  auto gated = [&](Shape s) {
    if (lstm) s.insert(s.begin(), 4);
    return s;
  };
  blocks.push_back({name + ".w_ih", gated({in, hid})});
  blocks.push_back({name + ".w_hh", gated({hid, hid})});
  blocks.push_back({name + ".b_ih", gated({hid})});
  blocks.push_back({name + ".b_hh", gated({hid})});
}

// Fan-in used for initialization bounds.
std::size_t fan_in(const std::string& name, const Shape& shape,
                   const std::vector<BlockSpec>& blocks, std::size_t index) {
  const bool recurrent = name.find(".w_") != std::string::npos ||
                         name.find(".b_") != std::string::npos;
  if (recurrent) return shape.back();
  if (name.ends_with(".weight")) {
    if (shape.size() == 4) return shape[1] * shape[2] * shape[3];
    return shape[0];
  }
  // bias: fan-in of the preceding weight block
  return fan_in(blocks[index - 1].name, blocks[index - 1].shape, blocks, index - 1);
}

}  // namespace

std::size_t BaseModelSpec::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += shape_numel(b.shape);
  return n;
}

std::size_t reference_parameter_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFnn: return kFnnParams;
    case ModelKind::kCnn: return kCnnParams;
    case ModelKind::kRnn: return kRnnParams;
    case ModelKind::kLstm: return kLstmParams;
    case ModelKind::kVae: break;
  }
  throw std::invalid_argument("no reference parameter count for kind vae");
}

const std::vector<ModelKind>& base_kinds() {
  static const std::vector<ModelKind> kinds{ModelKind::kFnn, ModelKind::kCnn,
                                            ModelKind::kRnn, ModelKind::kLstm};
  return kinds;
}

BaseModelSpec model_spec(ModelKind kind) {
  BaseModelSpec s;
  s.kind = kind;
  switch (kind) {
    case ModelKind::kFnn: {
      const std::size_t sizes[] = {784, 200, 100, 60, 30, 10};
      for (std::size_t i = 0; i + 1 < std::size(sizes); ++i) {
        add_dense(s.blocks, "fc" + std::to_string(i + 1), sizes[i], sizes[i + 1]);
      }
      s.stage_sizes.assign(std::begin(sizes), std::end(sizes));
      break;
    }
    case ModelKind::kCnn:
      s.blocks.push_back({"conv1.weight", {4, 1, 5, 5}});
      s.blocks.push_back({"conv1.bias", {4}});
      s.blocks.push_back({"conv2.weight", {8, 4, 5, 5}});
      s.blocks.push_back({"conv2.bias", {8}});
      s.blocks.push_back({"conv3.weight", {12, 8, 4, 4}});
      s.blocks.push_back({"conv3.bias", {12}});
      add_dense(s.blocks, "fc1", 588, 200);
      add_dense(s.blocks, "fc2", 200, 10);
      s.stage_sizes = {784, 3136, 1568, 588, 200, 10};
      break;
    case ModelKind::kRnn:
    case ModelKind::kLstm: {
      const bool lstm = kind == ModelKind::kLstm;
      const std::string prefix = lstm ? "lstm" : "rnn";
      add_recurrent(s.blocks, prefix + "1", kImageSide, kHidden, lstm);
      add_recurrent(s.blocks, prefix + "2", kHidden, kHidden, lstm);
      add_dense(s.blocks, "fc", kHidden, kNumClasses);
      s.stage_sizes = {28, 128, 128, 10};
      break;
    }
    case ModelKind::kVae:
      throw std::invalid_argument("model_spec: vae is not a base model");
  }
  return s;
}

BuiltModel build_model(ModelKind kind, std::uint64_t seed) {
  BuiltModel m{model_spec(kind), ParamSet(kind)};
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < m.spec.blocks.size(); ++i) {
    const BlockSpec& b = m.spec.blocks[i];
    const float bound =
        1.0f / std::sqrt(static_cast<float>(fan_in(b.name, b.shape, m.spec.blocks, i)));
    std::uniform_real_distribution<float> dist(-bound, bound);
    Tensor t(b.shape);
    for (float& v : t.values()) v = dist(rng);
    m.params.add(b.name, std::move(t));
  }
  return m;
}

void check_params(const BaseModelSpec& spec, const ParamSet& params) {
  if (params.kind() != spec.kind) {
    throw ShapeError("parameter set is for kind " +
                     std::string(kind_name(params.kind())) + ", model is " +
                     std::string(kind_name(spec.kind)));
  }
  if (params.block_count() != spec.blocks.size()) {
    throw ShapeError("parameter set has " + std::to_string(params.block_count()) +
                     " blocks, " + std::string(kind_name(spec.kind)) +
                     " needs " + std::to_string(spec.blocks.size()));
  }
  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& have = params.block(i);
    const auto& want = spec.blocks[i];
    if (have.name != want.name || have.value.shape() != want.shape) {
      throw ShapeError("block " + std::to_string(i) + ": expected " + want.name +
                       shape_to_string(want.shape) + ", got " + have.name +
                       shape_to_string(have.value.shape()));
    }
  }
}

Classifier::Classifier(const BaseModelSpec& spec) {
  switch (spec.kind) {
    case ModelKind::kFnn:
      for (std::size_t l = 0; l < 5; ++l) {
        net_.emplace<DenseLayer>(2 * l, 2 * l + 1);
        if (l < 4) net_.emplace<ReluLayer>();
      }
      input_shape_ = {784};
      break;
    case ModelKind::kCnn:
      input_shape_ = {1, kImageSide, kImageSide};
      net_.emplace<Conv2dLayer>(0, 1, Conv2dOptions{1, Padding2d::same(5)});
      net_.emplace<ReluLayer>();
      net_.emplace<MaxPool2Layer>();
      net_.emplace<Conv2dLayer>(2, 3, Conv2dOptions{1, Padding2d::same(5)});
      net_.emplace<ReluLayer>();
      net_.emplace<MaxPool2Layer>();
      net_.emplace<Conv2dLayer>(4, 5, Conv2dOptions{1, Padding2d::same(4)});
      net_.emplace<ReluLayer>();
      net_.emplace<ReshapeLayer>(Shape{588});
      net_.emplace<DenseLayer>(6, 7);
      net_.emplace<ReluLayer>();
      net_.emplace<DenseLayer>(8, 9);
      break;
    case ModelKind::kRnn:
    case ModelKind::kLstm: {
      const CellType cell =
          spec.kind == ModelKind::kLstm ? CellType::kLstm : CellType::kElman;
      input_shape_ = {kImageSide, kImageSide};
      net_.emplace<RecurrentLayer>(cell, RecurrentBlocks{0, 1, 2, 3}, kHidden);
      net_.emplace<RecurrentLayer>(cell, RecurrentBlocks{4, 5, 6, 7}, kHidden);
      net_.emplace<LastStepLayer>();
      net_.emplace<DenseLayer>(8, 9);
      break;
    }
    case ModelKind::kVae:
      throw std::invalid_argument("Classifier: vae is not a base model");
  }
}

Tensor Classifier::forward(const ParamSet& params, const Tensor& images) {
  Shape shape{images.dim(0)};
  shape.insert(shape.end(), input_shape_.begin(), input_shape_.end());
  return net_.forward(params, images.reshaped(std::move(shape)));
}

void Classifier::backward(const ParamSet& params, const Tensor& grad_logits,
                          Gradients& grads) {
  net_.backward(params, grad_logits, grads);
}

namespace {

constexpr std::size_t kEvalBatch = 250;

}  // namespace

EvalResult evaluate(const BaseModelSpec& spec, const ParamSet& params,
                    const MnistDataset& test) {
  check_params(spec, params);
  Classifier model(spec);
  EvalResult r;
  r.class_total.assign(kNumClasses, 0);
  r.class_correct.assign(kNumClasses, 0);
  std::vector<std::size_t> idx;
  double loss_sum = 0.0;
  for (std::size_t begin = 0; begin < test.size(); begin += kEvalBatch) {
    const std::size_t end = std::min(test.size(), begin + kEvalBatch);
    idx.resize(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const Batch b = make_batch(test, idx);
    const Tensor logits = model.forward(params, b.images);
    loss_sum += softmax_cross_entropy(logits, b.labels).loss *
                static_cast<double>(idx.size());
    const auto pred = argmax_rows(logits);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      ++r.class_total[b.labels[i]];
      if (pred[i] == b.labels[i]) {
        ++r.class_correct[b.labels[i]];
        ++r.correct;
      }
    }
  }
  r.total = test.size();
  if (r.total > 0) {
    r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
    r.loss = loss_sum / static_cast<double>(r.total);
  }
  return r;
}

double evaluate_accuracy(const BaseModelSpec& spec, const ParamSet& params,
                         const MnistDataset& test) {
  return evaluate(spec, params, test).accuracy;
}

BaseTrainResult train_base(const BaseModelSpec& spec, ParamSet params,
                           const MnistDataset& train,
                           const BaseTrainConfig& config,
                           const BaseEpochCallback& on_epoch) {
  ScopedFlushDenormals flush_denormals;
  check_params(spec, params);
  if (train.size() == 0) throw std::invalid_argument("train_base: empty dataset");
  if (config.validation_size >= train.size()) {
    throw std::invalid_argument("train_base: validation split leaves no training data");
  }

  // Fixed held-out split.
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 split_rng(config.seed ^ 0x5eedba5eULL);
  std::shuffle(order.begin(), order.end(), split_rng);
  const std::span<const std::size_t> all(order);
  const MnistDataset fit = subset(train, all.subspan(config.validation_size));
  const MnistDataset val = subset(train, all.first(config.validation_size));

  Classifier model(spec);
  Adam adam(AdamConfig{config.learning_rate});
  Gradients grads(params);
  BaseTrainResult result{params, {}, 0};
  double best_acc = -1.0;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    BatchSampler sampler(fit.size(), config.batch_size, config.seed + epoch);
    double loss_sum = 0.0;
    for (std::size_t bi = 0; bi < sampler.batch_count(); ++bi) {
      const Batch b = make_batch(fit, sampler.batch(bi));
      const Tensor logits = model.forward(params, b.images);
      const LossAndGrad lg = softmax_cross_entropy(logits, b.labels);
      if (!std::isfinite(lg.loss)) throw TrainingDiverged("non-finite training loss", epoch);
      loss_sum += lg.loss * static_cast<double>(b.labels.size());
      grads.zero();
      model.backward(params, lg.grad, grads);
      clip_gradient_norm(grads, config.clip_norm);
      adam.step(params, grads);
    }
    BaseEpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(fit.size());
    const EvalResult v = evaluate(spec, params, val);
    m.val_loss = v.loss;
    m.val_accuracy = v.accuracy;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(m);
    if (on_epoch) on_epoch(m);

    if (v.accuracy > best_acc) {
      best_acc = v.accuracy;
      result.params = params;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return result;
}

}  // namespace vaecomp
