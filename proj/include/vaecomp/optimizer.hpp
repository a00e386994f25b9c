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

#ifndef VAECOMP_OPTIMIZER_HPP_
#define VAECOMP_OPTIMIZER_HPP_

#include <cstdint>
#include <vector>

#include "vaecomp/param_set.hpp"

namespace vaecomp {

struct AdamConfig {
  float learning_rate = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float epsilon = 1e-8f;
};

// Adaptive-moment optimizer. Moment buffers are created lazily on the first
// step and must keep matching the parameter shapes afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // Applies one update in place. Throws std::domain_error naming the block if
  // any gradient is non-finite (parameters are left untouched in that case).
  void step(ParamSet& params, const Gradients& grads);

  std::uint64_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(float lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

// Scales gradients so their global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
double clip_gradient_norm(Gradients& grads, double max_norm);

// Flushes subnormal floats to zero on the calling thread while in scope.
// Adam second moments decay into the subnormal range on dead units, which
// slows training several-fold on x86. No-op on other targets.
class ScopedFlushDenormals {
 public:
  ScopedFlushDenormals();
  ~ScopedFlushDenormals();
  ScopedFlushDenormals(const ScopedFlushDenormals&) = delete;
  ScopedFlushDenormals& operator=(const ScopedFlushDenormals&) = delete;

 private:
  unsigned int saved_ = 0;
};

}  // namespace vaecomp

#endif  // VAECOMP_OPTIMIZER_HPP_
