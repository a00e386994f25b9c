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

#ifndef VAECOMP_LOSS_HPP_
#define VAECOMP_LOSS_HPP_

#include <cstdint>
#include <span>

#include "vaecomp/tensor.hpp"

namespace vaecomp {

struct LossAndGrad {
  double loss = 0.0;
  Tensor grad;  // d(loss)/d(logits)
};

// Mean over rows of -log softmax(logits)[label]. Gradient is
// (softmax - onehot) / batch. Labels must lie in [0, classes).
LossAndGrad softmax_cross_entropy(const Tensor& logits,
                                  std::span<const std::uint8_t> labels);

// Row-wise argmax.
std::vector<std::uint8_t> argmax_rows(const Tensor& logits);

}  // namespace vaecomp

#endif  // VAECOMP_LOSS_HPP_
