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

// Central-difference gradient checks for every hand-written backward pass.
// Each case returns the worst block-level relative error over `seeds` draws.

#ifndef VAECOMP_TESTS_GRADIENT_CASES_HPP_
#define VAECOMP_TESTS_GRADIENT_CASES_HPP_

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "vaecomp/layers.hpp"
#include "vaecomp/recurrent.hpp"
#include "vaecomp/vae.hpp"

namespace vaecomp::testing {

inline constexpr std::size_t kGradientSeeds = 10;
inline constexpr double kGradientTolerance = 1e-3;

inline double dense_gradient_error(std::uint64_t seed) {
  Tensor x = random_tensor({3, 5}, seed);
  Tensor w = random_tensor({5, 4}, seed + 1);
  Tensor b = random_tensor({4}, seed + 2);
  const Tensor r = random_tensor({3, 4}, seed + 3);
  const DenseGrads g = dense_backward(x, w, r);
  auto loss = [&] { return weighted_sum(dense_forward(x, w, b), r); };
  return std::max({gradient_error(x, g.input, loss), gradient_error(w, g.weights, loss),
                   gradient_error(b, g.bias, loss)});
}

inline double conv_gradient_error(std::uint64_t seed) {
  const Conv2dOptions opts{1, Padding2d::same(4)};
  Tensor x = random_tensor({2, 2, 6, 6}, seed);
  Tensor k = random_tensor({3, 2, 4, 4}, seed + 1, 0.5f);
  Tensor b = random_tensor({3}, seed + 2);
  const Tensor r = random_tensor({2, 3, 6, 6}, seed + 3);
  const Conv2dGrads g = conv2d_backward(x, k, opts, r);
  auto loss = [&] { return weighted_sum(conv2d_forward(x, k, b, opts), r); };
  double err = std::max({gradient_error(x, g.input, loss), gradient_error(k, g.kernels, loss),
                         gradient_error(b, g.bias, loss)});
  // Strided, unpadded variant.
  const Conv2dOptions strided{2, {}};
  Tensor x2 = random_tensor({1, 2, 7, 7}, seed + 4);
  Tensor k2 = random_tensor({2, 2, 3, 3}, seed + 5, 0.5f);
  Tensor b2 = random_tensor({2}, seed + 6);
  const Tensor r2 = random_tensor({1, 2, 3, 3}, seed + 7);
  const Conv2dGrads g2 = conv2d_backward(x2, k2, strided, r2);
  auto loss2 = [&] { return weighted_sum(conv2d_forward(x2, k2, b2, strided), r2); };
  err = std::max({err, gradient_error(x2, g2.input, loss2), gradient_error(k2, g2.kernels, loss2),
                  gradient_error(b2, g2.bias, loss2)});
  return err;
}

inline double pool_gradient_error(std::uint64_t seed) {
  Tensor x = distinct_tensor({2, 3, 4, 6}, seed);
  const Tensor r = random_tensor({2, 3, 2, 3}, seed + 1);
  const MaxPoolResult fwd = maxpool2_forward(x);
  const Tensor dx = maxpool2_backward(x.shape(), fwd.argmax, r);
  auto loss = [&] { return weighted_sum(maxpool2_forward(x).output, r); };
  return gradient_error(x, dx, loss);
}

struct RecurrentCase {
  Tensor w_ih, w_hh, b_ih, b_hh;
  Tensor g_ih, g_hh, g_bih, g_bhh;

  RecurrentCase(Shape ih, Shape hh, Shape bias, std::uint64_t seed)
      : w_ih(random_tensor(ih, seed, 0.5f)),
        w_hh(random_tensor(hh, seed + 1, 0.5f)),
        b_ih(random_tensor(bias, seed + 2, 0.5f)),
        b_hh(random_tensor(bias, seed + 3, 0.5f)),
        g_ih(ih),
        g_hh(hh),
        g_bih(bias),
        g_bhh(bias) {}

  RecurrentWeights weights() const { return {w_ih, w_hh, b_ih, b_hh}; }
  RecurrentWeightGrads grads() { return {g_ih, g_hh, g_bih, g_bhh}; }
};

inline double rnn_cell_gradient_error(std::uint64_t seed) {
  constexpr std::size_t kB = 3, kIn = 4, kH = 5;
  RecurrentCase c({kIn, kH}, {kH, kH}, {kH}, seed + 10);
  Tensor x = random_tensor({kB, kIn}, seed);
  Tensor h_prev = random_tensor({kB, kH}, seed + 1);
  const Tensor r = random_tensor({kB, kH}, seed + 2);
  const Tensor h = rnn_cell_forward(x, h_prev, c.weights());
  RecurrentWeightGrads acc = c.grads();
  const CellInputGrads g = rnn_cell_backward(x, h_prev, h, c.weights(), r, acc);
  auto loss = [&] { return weighted_sum(rnn_cell_forward(x, h_prev, c.weights()), r); };
  return std::max({gradient_error(x, g.x, loss), gradient_error(h_prev, g.h_prev, loss),
                   gradient_error(c.w_ih, c.g_ih, loss), gradient_error(c.w_hh, c.g_hh, loss),
                   gradient_error(c.b_ih, c.g_bih, loss), gradient_error(c.b_hh, c.g_bhh, loss)});
}

inline double lstm_cell_gradient_error(std::uint64_t seed) {
  constexpr std::size_t kB = 2, kIn = 3, kH = 4;
  RecurrentCase c({4, kIn, kH}, {4, kH, kH}, {4, kH}, seed + 10);
  Tensor x = random_tensor({kB, kIn}, seed);
  Tensor h_prev = random_tensor({kB, kH}, seed + 1);
  Tensor c_prev = random_tensor({kB, kH}, seed + 2);
  const Tensor rh = random_tensor({kB, kH}, seed + 3);
  const Tensor rc = random_tensor({kB, kH}, seed + 4);
  const LstmCellCache cache = lstm_cell_forward(x, h_prev, c_prev, c.weights());
  RecurrentWeightGrads acc = c.grads();
  const CellInputGrads g = lstm_cell_backward(cache, c.weights(), rh, rc, acc);
  auto loss = [&] {
    const LstmCellCache out = lstm_cell_forward(x, h_prev, c_prev, c.weights());
    return weighted_sum(out.h, rh) + weighted_sum(out.c, rc);
  };
  return std::max({gradient_error(x, g.x, loss), gradient_error(h_prev, g.h_prev, loss),
                   gradient_error(c_prev, g.c_prev, loss),
                   gradient_error(c.w_ih, c.g_ih, loss), gradient_error(c.w_hh, c.g_hh, loss),
                   gradient_error(c.b_ih, c.g_bih, loss), gradient_error(c.b_hh, c.g_bhh, loss)});
}

// Full sequence layer (BPTT) for either cell type.
inline double recurrent_layer_gradient_error(CellType type, std::uint64_t seed) {
  constexpr std::size_t kB = 2, kT = 4, kIn = 3, kH = 4;
  const std::size_t gates = type == CellType::kLstm ? 4 : 1;
  auto with_gates = [gates](Shape s) {
    if (gates > 1) s.insert(s.begin(), gates);
    return s;
  };
  ParamSet p;
  const std::size_t ih = p.add("w_ih", random_tensor(with_gates({kIn, kH}), seed, 0.5f));
  const std::size_t hh = p.add("w_hh", random_tensor(with_gates({kH, kH}), seed + 1, 0.5f));
  const std::size_t bi = p.add("b_ih", random_tensor(with_gates({kH}), seed + 2, 0.5f));
  const std::size_t bh = p.add("b_hh", random_tensor(with_gates({kH}), seed + 3, 0.5f));
  RecurrentLayer layer(type, {ih, hh, bi, bh}, kH);
  Tensor x = random_tensor({kB, kT, kIn}, seed + 4);
  const Tensor r = random_tensor({kB, kT, kH}, seed + 5);
  layer.forward(p, x);
  Gradients g(p);
  const Tensor dx = layer.backward(p, r, g);
  auto loss = [&] {
    RecurrentLayer probe(type, {ih, hh, bi, bh}, kH);
    return weighted_sum(probe.forward(p, x), r);
  };
  // Smooth in every argument, so a wider step only trims rounding noise.
  constexpr double kStep = 1e-2;
  double err = gradient_error(x, dx, loss, kStep);
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    err = std::max(err, gradient_error(p[i], g[i], loss, kStep));
  }
  return err;
}

// Smallest |pre-activation| over every ReLU in the VAE for this batch.
inline double relu_margin(const ParamSet& p, const Tensor& x, const Tensor& eps) {
  double margin = 1e30;
  auto track = [&margin](const Tensor& pre) {
    for (float v : pre.values()) margin = std::min(margin, std::abs(static_cast<double>(v)));
  };
  auto relu_of = [](Tensor t) {
    for (float& v : t.values()) v = std::max(v, 0.0f);
    return t;
  };
  const Tensor a1 = dense_forward(x, p[0], p[1]);
  track(a1);
  const Tensor a2 = dense_forward(relu_of(a1), p[2], p[3]);
  track(a2);
  const Tensor h = relu_of(a2);
  const Tensor z = reparameterize(dense_forward(h, p[4], p[5]), dense_forward(h, p[6], p[7]), eps);
  const Tensor d1 = dense_forward(z, p[8], p[9]);
  track(d1);
  track(dense_forward(relu_of(d1), p[10], p[11]));
  return margin;
}

// Independent double-precision negative ELBO for a VAE with ReLU hidden
// layers, written from the definition. Used as the finite-difference oracle.
inline double reference_elbo(const ParamSet& p, const Tensor& x, const Tensor& eps,
                             std::size_t hidden_layers, double recon_sigma) {
  using Matrix = std::vector<std::vector<double>>;
  auto dense = [&p](const Matrix& in, std::size_t block, bool relu_out) {
    const Tensor& w = p[block];
    const Tensor& b = p[block + 1];
    const std::size_t n_in = w.dim(0), n_out = w.dim(1);
    Matrix out(in.size(), std::vector<double>(n_out));
    for (std::size_t r = 0; r < in.size(); ++r) {
      for (std::size_t j = 0; j < n_out; ++j) {
        double acc = b[j];
        for (std::size_t i = 0; i < n_in; ++i) acc += in[r][i] * static_cast<double>(w[i * n_out + j]);
        out[r][j] = relu_out ? std::max(acc, 0.0) : acc;
      }
    }
    return out;
  };
  Matrix h(x.dim(0), std::vector<double>(x.dim(1)));
  for (std::size_t r = 0; r < x.dim(0); ++r) {
    for (std::size_t c = 0; c < x.dim(1); ++c) h[r][c] = x.at(r, c);
  }
  std::size_t block = 0;
  for (std::size_t l = 0; l < hidden_layers; ++l, block += 2) h = dense(h, block, true);
  const Matrix mu = dense(h, block, false);
  const Matrix lv = dense(h, block + 2, false);
  block += 4;
  double kl = 0.0;
  Matrix z = mu;
  for (std::size_t r = 0; r < mu.size(); ++r) {
    for (std::size_t j = 0; j < mu[r].size(); ++j) {
      const double var = std::exp(std::clamp(lv[r][j], -20.0, 20.0));
      kl += 0.5 * (mu[r][j] * mu[r][j] + var - 1.0 - lv[r][j]);
      z[r][j] = mu[r][j] + std::sqrt(var) * eps.at(r, j);
    }
  }
  for (std::size_t l = 0; l < hidden_layers; ++l, block += 2) z = dense(z, block, true);
  const Matrix x_hat = dense(z, block, false);
  double sq = 0.0;
  for (std::size_t r = 0; r < x_hat.size(); ++r) {
    for (std::size_t c = 0; c < x_hat[r].size(); ++c) {
      const double d = x.at(r, c) - x_hat[r][c];
      sq += d * d;
    }
  }
  return sq / (2.0 * recon_sigma * recon_sigma) + kl;
}

// Inputs are redrawn until every ReLU sits at least kMargin from its kink,
// so the probe never straddles a point of non-differentiability.
inline double elbo_gradient_error(std::uint64_t seed, double recon_sigma = 1.0) {
  constexpr double kStep = 1e-3;
  constexpr double kMargin = 1e-2;
  const VaeArchitecture arch{12, 3, {8, 6}};
  VaeParams vae = VaeParams::initialize(arch, seed);
  ParamSet& p = vae.params();
  // Spread the logvar head so exp(logvar/2) differs visibly from 1.
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    if (p.block(i).name.rfind("logvar", 0) == 0) p[i] = random_tensor(p[i].shape(), seed + i, 0.5f);
  }
  Tensor x;
  Tensor eps;
  for (std::uint64_t draw = 0;; ++draw) {
    x = random_tensor({2, arch.chunk_size}, seed + 100 + draw);
    eps = random_tensor({2, arch.latent_dim}, seed + 5000 + draw, 1.5f);
    if (relu_margin(p, x, eps) >= kMargin) break;
  }
  VaeNetwork net(arch);
  Gradients g(p);
  const double total = elbo_forward_backward(net, p, x, eps, recon_sigma, &g).total;
  const double ref = reference_elbo(p, x, eps, arch.hidden.size(), recon_sigma);
  if (std::abs(total - ref) > 1e-4 * std::max(1.0, std::abs(ref))) return 1.0;
  auto loss = [&] { return reference_elbo(p, x, eps, arch.hidden.size(), recon_sigma); };
  double err = 0.0;
  for (std::size_t i = 0; i < p.block_count(); ++i) {
    err = std::max(err, gradient_error(p[i], g[i], loss, kStep));
  }
  return err;
}

struct GradientCase {
  std::string name;
  double worst = 0.0;
};

// Worst error of each component over seeds 1..kGradientSeeds.
inline std::vector<GradientCase> run_gradient_cases() {
  std::vector<GradientCase> cases = {{"dense", 0}, {"conv", 0}, {"pool", 0},
                                     {"rnn_cell", 0}, {"lstm_cell", 0}, {"rnn_layer", 0},
                                     {"lstm_layer", 0}, {"elbo", 0}};
  for (std::uint64_t s = 1; s <= kGradientSeeds; ++s) {
    const std::uint64_t seed = 1000 * s;
    const double errs[] = {dense_gradient_error(seed),
                           conv_gradient_error(seed),
                           pool_gradient_error(seed),
                           rnn_cell_gradient_error(seed),
                           lstm_cell_gradient_error(seed),
                           recurrent_layer_gradient_error(CellType::kElman, seed),
                           recurrent_layer_gradient_error(CellType::kLstm, seed),
                           elbo_gradient_error(seed)};
    for (std::size_t i = 0; i < cases.size(); ++i) cases[i].worst = std::max(cases[i].worst, errs[i]);
  }
  return cases;
}

}  // namespace vaecomp::testing

#endif  // VAECOMP_TESTS_GRADIENT_CASES_HPP_
