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

// Helpers shared by the unit and acceptance suites: seeded tensors, a
// weighted scalar reduction and a central-difference gradient probe.

#ifndef VAECOMP_TESTS_SUPPORT_HPP_
#define VAECOMP_TESTS_SUPPORT_HPP_

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>

#include <cstring>
#include <string>

#include "vaecomp/base_models.hpp"
#include "vaecomp/mnist.hpp"
#include "vaecomp/param_codec.hpp"
#include "vaecomp/tensor.hpp"

namespace vaecomp::testing {

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed, float scale = 1.0f) {
  Tensor t(shape);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-scale, scale);
  for (float& v : t.values()) v = dist(rng);
  return t;
}

// Distinct values spaced `gap` apart in random order, so small probes never
// change a max-pool winner.
inline Tensor distinct_tensor(const Shape& shape, std::uint64_t seed, float gap = 0.01f) {
  Tensor t(shape);
  std::vector<std::size_t> order(t.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const float mid = 0.5f * gap * static_cast<float>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[order[i]] = gap * static_cast<float>(i) - mid;
  return t;
}

// sum_i r_i y_i accumulated in double; its gradient w.r.t. y is r.
inline double weighted_sum(const Tensor& y, const Tensor& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += static_cast<double>(y[i]) * static_cast<double>(r[i]);
  }
  return s;
}

// ||analytic - numeric|| / max(||analytic||, ||numeric||) over every entry of
// `x`, where numeric is the central difference of `loss` with step h.
inline double gradient_error(Tensor& x, const Tensor& analytic,
                             const std::function<double()>& loss, double h = 1e-3) {
  double diff = 0.0;
  double na = 0.0;
  double nn = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float saved = x[i];
    x[i] = static_cast<float>(saved + h);
    const double up = loss();
    x[i] = static_cast<float>(saved - h);
    const double down = loss();
    x[i] = saved;
    const double step = (static_cast<double>(static_cast<float>(saved + h)) -
                         static_cast<double>(static_cast<float>(saved - h)));
    const double numeric = (up - down) / step;
    const double a = analytic[i];
    diff += (a - numeric) * (a - numeric);
    na += a * a;
    nn += numeric * numeric;
  }
  const double denom = std::max(std::sqrt(na), std::sqrt(nn));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

// Easily separable stand-in for MNIST: class k lights a bar of rows
// [2k + 4, 2k + 6) on top of faint noise. Pixel values are multiples of 1/255.
inline MnistDataset synthetic_digits(std::size_t n, std::uint64_t seed) {
  MnistDataset d;
  d.images = Tensor({n, kImageSide, kImageSide});
  d.labels.resize(n);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(0, 40);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % kNumClasses;
    d.labels[i] = static_cast<std::uint8_t>(label);
    float* img = d.images.data() + i * kImageSide * kImageSide;
    for (std::size_t r = 0; r < kImageSide; ++r) {
      for (std::size_t c = 0; c < kImageSide; ++c) {
        const bool bar = r >= 2 * label + 4 && r < 2 * label + 6 && c >= 4 && c < 24;
        img[r * kImageSide + c] = static_cast<float>(bar ? 255 : noise(rng)) / 255.0f;
      }
    }
  }
  return d;
}

// Random blocks of rank 1..4; values mix ordinary floats with signed zeros,
// subnormals and extremes so bit-level identity is exercised.
inline ParamSet random_param_set(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> blocks(1, 6), rank(1, 4), extent(1, 9);
  std::uniform_real_distribution<float> value(-3.0f, 3.0f);
  std::uniform_int_distribution<int> special(0, 19);
  const ModelKind kinds[] = {ModelKind::kFnn, ModelKind::kCnn, ModelKind::kRnn, ModelKind::kLstm};
  ParamSet p(kinds[seed % 4]);
  const std::size_t n_blocks = blocks(rng);
  for (std::size_t b = 0; b < n_blocks; ++b) {
    Shape shape(rank(rng));
    for (auto& e : shape) e = extent(rng);
    Tensor t(shape);
    for (float& v : t.values()) {
      switch (special(rng)) {
        case 0: v = -0.0f; break;
        case 1: v = std::numeric_limits<float>::denorm_min(); break;
        case 2: v = std::numeric_limits<float>::max(); break;
        default: v = value(rng);
      }
    }
    p.add("block" + std::to_string(b), std::move(t));
  }
  return p;
}

inline BaseModelSpec spec_of(const ParamSet& p) {
  BaseModelSpec spec;
  spec.kind = p.kind();
  for (const auto& b : p.blocks()) spec.blocks.push_back({b.name, b.value.shape()});
  return spec;
}

inline bool bit_identical(const ParamSet& a, const ParamSet& b) {
  if (a.kind() != b.kind() || a.block_count() != b.block_count()) return false;
  for (std::size_t i = 0; i < a.block_count(); ++i) {
    const Tensor& x = a[i];
    const Tensor& y = b[i];
    if (a.block(i).name != b.block(i).name || x.shape() != y.shape()) return false;
    if (std::memcmp(x.data(), y.data(), x.size() * sizeof(float)) != 0) return false;
  }
  return true;
}

// flatten -> chunk -> unchunk -> unflatten reproduces every bit.
inline bool codec_identity(const ParamSet& p, std::size_t chunk_size) {
  const ChunkedParams c = chunk(flatten(p), chunk_size, p.kind());
  for (std::size_t i = c.total_len; i < c.chunks.size(); ++i) {
    if (std::bit_cast<std::uint32_t>(c.chunks[i]) != 0) return false;
  }
  return bit_identical(unflatten(unchunk(c), spec_of(p)), p);
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

// E_q[log q(z) - log p(z)] for q = N(mu, exp(logvar)), p = N(0, I), estimated
// from `samples` draws of z; one row of mu/logvar is one distribution.
inline MonteCarloEstimate kl_monte_carlo(const Tensor& mu, const Tensor& logvar,
                                         std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    double log_ratio = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      const double sigma = std::exp(0.5 * logvar[i]);
      const double e = normal(rng);
      const double z = mu[i] + sigma * e;
      log_ratio += -0.5 * logvar[i] - 0.5 * e * e + 0.5 * z * z;
    }
    sum += log_ratio;
    sum_sq += log_ratio * log_ratio;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

}  // namespace vaecomp::testing

#endif  // VAECOMP_TESTS_SUPPORT_HPP_
