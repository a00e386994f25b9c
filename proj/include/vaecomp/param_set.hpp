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

#ifndef VAECOMP_PARAM_SET_HPP_
#define VAECOMP_PARAM_SET_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vaecomp/tensor.hpp"

namespace vaecomp {

// Tag carried by weight files. The numeric values are the on-disk kind tags.
enum class ModelKind : std::uint8_t {
  kFnn = 1,
  kCnn = 2,
  kRnn = 3,
  kLstm = 4,
  kVae = 5,
};

std::string_view kind_name(ModelKind kind);
// Accepts "fnn", "cnn", "rnn", "lstm", "vae" (case-insensitive).
ModelKind parse_kind(std::string_view name);
std::optional<ModelKind> kind_from_tag(std::uint8_t tag);

struct ParamBlock {
  std::string name;
  Tensor value;

  bool operator==(const ParamBlock&) const = default;
};

// Ordered, named parameter blocks of one network. Block order is the
// canonical flattening order.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(ModelKind kind) : kind_(kind) {}

  ModelKind kind() const { return kind_; }
  void set_kind(ModelKind kind) { kind_ = kind; }

  // Appends a zero-filled block and returns its index.
  std::size_t add(std::string name, Shape shape);
  std::size_t add(std::string name, Tensor value);

  std::size_t block_count() const { return blocks_.size(); }
  const ParamBlock& block(std::size_t i) const { return blocks_.at(i); }
  ParamBlock& block(std::size_t i) { return blocks_.at(i); }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  const Tensor& operator[](std::size_t i) const { return blocks_[i].value; }
  Tensor& operator[](std::size_t i) { return blocks_[i].value; }

  std::optional<std::size_t> find(std::string_view name) const;

  // Total number of scalar parameters over all blocks.
  std::size_t parameter_count() const;

  bool operator==(const ParamSet&) const = default;

 private:
  ModelKind kind_ = ModelKind::kFnn;
  std::vector<ParamBlock> blocks_;
};

// Per-block gradients, shape-matched to a ParamSet.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParamSet& params);

  std::size_t block_count() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_[i]; }
  const Tensor& operator[](std::size_t i) const { return grads_[i]; }

  void zero();
  double squared_norm() const;
  void scale(float factor);

 private:
  std::vector<Tensor> grads_;
};

}  // namespace vaecomp

#endif  // VAECOMP_PARAM_SET_HPP_
