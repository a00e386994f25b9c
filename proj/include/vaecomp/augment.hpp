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

// Noise-perturbed copies of a real parameter sequence, used as VAE
// training and validation data. The real sequence itself is never emitted.

#ifndef VAECOMP_AUGMENT_HPP_
#define VAECOMP_AUGMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vaecomp/tensor.hpp"

namespace vaecomp {

struct AugmentConfig {
  std::size_t n_train = 80;
  std::size_t n_val = 20;
  double position_fraction = 0.3;  // in (0, 1]
  double noise_stddev = 0.01;
  std::uint64_t seed = 7;
};

struct VariantSet {
  std::vector<Tensor> train;
  std::vector<Tensor> val;
};

// Each variant copies `flat` and adds N(0, noise_stddev^2) at
// round(position_fraction * n) distinct positions drawn uniformly. Variant k
// uses its own generator derived from (seed, k), so variants are reproducible
// individually.
VariantSet generate_variants(const Tensor& flat, const AugmentConfig& config);

// Number of positions each variant perturbs.
std::size_t perturbed_positions(std::size_t n, double position_fraction);

struct SplitReport {
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  double ratio = 0.0;  // n_train / n_val; infinity when n_val == 0
  bool ok = false;     // exactly 4:1 with both sides non-empty
  std::string message;
};

SplitReport split_check(std::size_t n_train, std::size_t n_val);

}  // namespace vaecomp

#endif  // VAECOMP_AUGMENT_HPP_
