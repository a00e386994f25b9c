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

#include "vaecomp/augment.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace vaecomp {

namespace {

// splitmix64 finalizer; decorrelates per-variant seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Tensor make_variant(const Tensor& flat, const AugmentConfig& config,
                    std::size_t count, std::uint64_t seed,
                    std::vector<std::size_t>& scratch) {
  if (config.noise_stddev == 0.0) return flat;
  std::mt19937_64 rng(seed);
  const std::size_t n = flat.size();
  // Partial Fisher-Yates: the first `count` entries become a uniform sample
  // of distinct positions.
  scratch.resize(n);
  std::iota(scratch.begin(), scratch.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(scratch[i], scratch[pick(rng)]);
  }
  std::normal_distribution<double> noise(0.0, config.noise_stddev);
  Tensor v = flat;
  for (std::size_t i = 0; i < count; ++i) {
    v[scratch[i]] = static_cast<float>(v[scratch[i]] + noise(rng));
  }
  return v;
}

}  // namespace

std::size_t perturbed_positions(std::size_t n, double position_fraction) {
  return static_cast<std::size_t>(
      std::llround(position_fraction * static_cast<double>(n)));
}

VariantSet generate_variants(const Tensor& flat, const AugmentConfig& config) {
  if (flat.size() == 0) throw std::invalid_argument("generate_variants: empty sequence");
  if (!(config.position_fraction > 0.0 && config.position_fraction <= 1.0)) {
    throw std::invalid_argument("generate_variants: position fraction must be in (0,1]");
  }
  if (config.noise_stddev < 0.0) {
    throw std::invalid_argument("generate_variants: negative noise stddev");
  }
  const Tensor source = flat.reshaped({flat.size()});
  const std::size_t count = perturbed_positions(source.size(), config.position_fraction);
  VariantSet out;
  std::vector<std::size_t> scratch;
  std::size_t k = 0;
  for (std::size_t i = 0; i < config.n_train; ++i, ++k) {
    out.train.push_back(make_variant(source, config, count, mix_seed(config.seed, k), scratch));
  }
  for (std::size_t i = 0; i < config.n_val; ++i, ++k) {
    out.val.push_back(make_variant(source, config, count, mix_seed(config.seed, k), scratch));
  }
  return out;
}

SplitReport split_check(std::size_t n_train, std::size_t n_val) {
  SplitReport r;
  r.n_train = n_train;
  r.n_val = n_val;
  r.ratio = n_val == 0 ? std::numeric_limits<double>::infinity()
                       : static_cast<double>(n_train) / static_cast<double>(n_val);
  r.ok = n_val > 0 && n_train == 4 * n_val;
  std::ostringstream os;
  os << n_train << " train / " << n_val << " val";
  if (n_val > 0) os << " (ratio " << r.ratio << ":1)";
  os << (r.ok ? ": 4:1 ok" : ": deviates from 4:1");
  r.message = os.str();
  return r;
}

}  // namespace vaecomp
