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

#include "vaecomp/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#if defined(__SSE__)
#include <xmmintrin.h>
#endif

namespace vaecomp {

void Adam::step(ParamSet& params, const Gradients& grads) {
  if (grads.block_count() != params.block_count()) {
    throw ShapeError("adam: " + std::to_string(grads.block_count()) +
                     " gradient blocks for " +
                     std::to_string(params.block_count()) + " parameter blocks");
  }
  for (std::size_t i = 0; i < params.block_count(); ++i) {
    expect_shape(grads[i], params[i].shape(), params.block(i).name.c_str());
    if (!grads[i].all_finite()) {
      throw std::domain_error("adam: non-finite gradient in block '" +
                              params.block(i).name + "'");
    }
  }
  if (m_.empty()) {
    for (const auto& b : params.blocks()) {
      m_.emplace_back(b.value.shape());
      v_.emplace_back(b.value.shape());
    }
  }
  ++step_;
  const float b1 = config_.beta1, b2 = config_.beta2;
  const double t = static_cast<double>(step_);
  const float c1 = static_cast<float>(1.0 - std::pow(b1, t));
  const float c2 = static_cast<float>(1.0 - std::pow(b2, t));
  const float lr = config_.learning_rate;
  for (std::size_t i = 0; i < params.block_count(); ++i) {
    float* p = params[i].data();
    const float* g = grads[i].data();
    float* m = m_[i].data();
    float* v = v_[i].data();
    const std::size_t n = params[i].size();
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = b1 * m[k] + (1.0f - b1) * g[k];
      v[k] = b2 * v[k] + (1.0f - b2) * g[k] * g[k];
      const float m_hat = m[k] / c1;
      const float v_hat = v[k] / c2;
      p[k] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

double clip_gradient_norm(Gradients& grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) {
    grads.scale(static_cast<float>(max_norm / norm));
  }
  return norm;
}

ScopedFlushDenormals::ScopedFlushDenormals() {
#if defined(__SSE__)
  saved_ = _mm_getcsr();
  _mm_setcsr(saved_ | 0x8040u);  // FTZ | DAZ
#endif
}

ScopedFlushDenormals::~ScopedFlushDenormals() {
#if defined(__SSE__)
  _mm_setcsr(saved_);
#endif
}

}  // namespace vaecomp
