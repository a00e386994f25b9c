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

#include "vaecomp/param_set.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <utility>

namespace vaecomp {

std::string_view kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFnn: return "fnn";
    case ModelKind::kCnn: return "cnn";
    case ModelKind::kRnn: return "rnn";
    case ModelKind::kLstm: return "lstm";
    case ModelKind::kVae: return "vae";
  }
  return "unknown";
}

ModelKind parse_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (ModelKind k : {ModelKind::kFnn, ModelKind::kCnn, ModelKind::kRnn,
                      ModelKind::kLstm, ModelKind::kVae}) {
    if (lower == kind_name(k)) return k;
  }
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

std::optional<ModelKind> kind_from_tag(std::uint8_t tag) {
  if (tag >= 1 && tag <= 5) return static_cast<ModelKind>(tag);
  return std::nullopt;
}

std::size_t ParamSet::add(std::string name, Shape shape) {
  return add(std::move(name), Tensor(std::move(shape)));
}

std::size_t ParamSet::add(std::string name, Tensor value) {
  if (find(name)) throw std::invalid_argument("duplicate block name " + name);
  blocks_.push_back({std::move(name), std::move(value)});
  return blocks_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParamSet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.value.size();
  return n;
}

Gradients::Gradients(const ParamSet& params) {
  grads_.reserve(params.block_count());
  for (const auto& b : params.blocks()) grads_.emplace_back(b.value.shape());
}

void Gradients::zero() {
  for (auto& g : grads_) g.fill(0.0f);
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& g : grads_) {
    for (float v : g.values()) s += static_cast<double>(v) * v;
  }
  return s;
}

void Gradients::scale(float factor) {
  for (auto& g : grads_) {
    for (float& v : g.values()) v *= factor;
  }
}

}  // namespace vaecomp
