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

#include "vaecomp/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vaecomp {

LossAndGrad softmax_cross_entropy(const Tensor& logits,
                                  std::span<const std::uint8_t> labels) {
  if (logits.rank() != 2 || logits.dim(0) != labels.size()) {
    throw ShapeError("softmax_cross_entropy: logits " +
                     shape_to_string(logits.shape()) + " vs " +
                     std::to_string(labels.size()) + " labels");
  }
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  LossAndGrad out{0.0, Tensor(logits.shape())};
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) {
      throw std::out_of_range("softmax_cross_entropy: label " +
                              std::to_string(labels[b]) + " at row " +
                              std::to_string(b) + " not in [0," +
                              std::to_string(classes) + ")");
    }
    auto row = logits.row(b);
    const double max = *std::max_element(row.begin(), row.end());
    double denom = 0.0;
    for (float v : row) denom += std::exp(static_cast<double>(v) - max);
    const double log_denom = std::log(denom);
    out.loss += log_denom - (static_cast<double>(row[labels[b]]) - max);
    auto g = out.grad.row(b);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(static_cast<double>(row[c]) - max - log_denom);
      g[c] = static_cast<float>((p - (c == labels[b] ? 1.0 : 0.0)) /
                                static_cast<double>(batch));
    }
  }
  if (batch > 0) out.loss /= static_cast<double>(batch);
  return out;
}

std::vector<std::uint8_t> argmax_rows(const Tensor& logits) {
  std::vector<std::uint8_t> out(logits.dim(0));
  for (std::size_t b = 0; b < out.size(); ++b) {
    auto row = logits.row(b);
    out[b] = static_cast<std::uint8_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

}  // namespace vaecomp
