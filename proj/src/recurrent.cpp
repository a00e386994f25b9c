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

#include "vaecomp/recurrent.hpp"

#include <cmath>
#include <string>

#include "eigen_map.hpp"

namespace vaecomp {

using detail::as_matrix;

namespace {

struct CellDims {
  std::size_t batch, in, hid;
};

CellDims check_cell(const Tensor& x, const Tensor& h_prev,
                    const RecurrentWeights& w, std::size_t gates) {
  if (x.rank() != 2 || h_prev.rank() != 2 || x.dim(0) != h_prev.dim(0)) {
    throw ShapeError("recurrent cell: x " + shape_to_string(x.shape()) +
                     " and h_prev " + shape_to_string(h_prev.shape()) +
                     " must be [batch, *] with equal batch");
  }
  const CellDims d{x.dim(0), x.dim(1), h_prev.dim(1)};
  Shape wih{d.in, d.hid}, whh{d.hid, d.hid}, b{d.hid};
  if (gates > 1) {
    wih.insert(wih.begin(), gates);
    whh.insert(whh.begin(), gates);
    b.insert(b.begin(), gates);
  }
  expect_shape(w.w_ih, wih, "recurrent w_ih");
  expect_shape(w.w_hh, whh, "recurrent w_hh");
  expect_shape(w.b_ih, b, "recurrent b_ih");
  expect_shape(w.b_hh, b, "recurrent b_hh");
  return d;
}

// x * w_ih[g] + h * w_hh[g] + b_ih[g] + b_hh[g]
Tensor gate_preactivation(const Tensor& x, const Tensor& h,
                          const RecurrentWeights& w, const CellDims& d,
                          std::size_t g) {
  Tensor pre({d.batch, d.hid});
  auto out = as_matrix(pre);
  out.noalias() = as_matrix(x) * as_matrix(w.w_ih.data() + g * d.in * d.hid, d.in, d.hid);
  out.noalias() += as_matrix(h) * as_matrix(w.w_hh.data() + g * d.hid * d.hid, d.hid, d.hid);
  const auto bi = detail::ConstVectorMap(w.b_ih.data() + g * d.hid,
                                         static_cast<Eigen::Index>(d.hid));
  const auto bh = detail::ConstVectorMap(w.b_hh.data() + g * d.hid,
                                         static_cast<Eigen::Index>(d.hid));
  out.rowwise() += bi + bh;
  return pre;
}

// Accumulates weight grads of gate g from the pre-activation gradient `da`
// and adds its contribution to dx / dh_prev.
void gate_backward(const Tensor& x, const Tensor& h_prev, const Tensor& da,
                   const RecurrentWeights& w, const CellDims& d, std::size_t g,
                   RecurrentWeightGrads& acc, Tensor& dx, Tensor& dh_prev) {
  const auto dy = as_matrix(da);
  as_matrix(acc.w_ih.data() + g * d.in * d.hid, d.in, d.hid).noalias() +=
      as_matrix(x).transpose() * dy;
  as_matrix(acc.w_hh.data() + g * d.hid * d.hid, d.hid, d.hid).noalias() +=
      as_matrix(h_prev).transpose() * dy;
  const Eigen::RowVectorXf db = dy.colwise().sum();
  detail::VectorMap(acc.b_ih.data() + g * d.hid, static_cast<Eigen::Index>(d.hid)) += db;
  detail::VectorMap(acc.b_hh.data() + g * d.hid, static_cast<Eigen::Index>(d.hid)) += db;
  as_matrix(dx).noalias() +=
      dy * as_matrix(w.w_ih.data() + g * d.in * d.hid, d.in, d.hid).transpose();
  as_matrix(dh_prev).noalias() +=
      dy * as_matrix(w.w_hh.data() + g * d.hid * d.hid, d.hid, d.hid).transpose();
}

}  // namespace

Tensor rnn_cell_forward(const Tensor& x, const Tensor& h_prev,
                        const RecurrentWeights& w) {
  const CellDims d = check_cell(x, h_prev, w, 1);
  Tensor h = gate_preactivation(x, h_prev, w, d, 0);
  for (float& v : h.values()) v = std::tanh(v);
  return h;
}

CellInputGrads rnn_cell_backward(const Tensor& x, const Tensor& h_prev,
                                 const Tensor& h, const RecurrentWeights& w,
                                 const Tensor& grad_h,
                                 RecurrentWeightGrads& acc) {
  const CellDims d = check_cell(x, h_prev, w, 1);
  expect_shape(grad_h, h.shape(), "rnn cell grad_h");
  Tensor da = grad_h;
  for (std::size_t i = 0; i < da.size(); ++i) da[i] *= 1.0f - h[i] * h[i];
  CellInputGrads out{Tensor(x.shape()), Tensor(h_prev.shape()), Tensor()};
  gate_backward(x, h_prev, da, w, d, 0, acc, out.x, out.h_prev);
  return out;
}

LstmCellCache lstm_cell_forward(const Tensor& x, const Tensor& h_prev,
                                const Tensor& c_prev,
                                const RecurrentWeights& w) {
  const CellDims d = check_cell(x, h_prev, w, 4);
  expect_shape(c_prev, h_prev.shape(), "lstm c_prev");
  LstmCellCache cache{x, h_prev, c_prev, {}, Tensor(h_prev.shape()),
                      Tensor(h_prev.shape()), Tensor(h_prev.shape())};
  for (std::size_t g = 0; g < 4; ++g) {
    Tensor pre = gate_preactivation(x, h_prev, w, d, g);
    for (float& v : pre.values()) v = g == kCellGate ? std::tanh(v) : sigmoid(v);
    cache.gates[g] = std::move(pre);
  }
  const auto& gi = cache.gates[kInputGate];
  const auto& gf = cache.gates[kForgetGate];
  const auto& gg = cache.gates[kCellGate];
  const auto& go = cache.gates[kOutputGate];
  for (std::size_t k = 0; k < cache.c.size(); ++k) {
    cache.c[k] = gf[k] * c_prev[k] + gi[k] * gg[k];
    cache.tanh_c[k] = std::tanh(cache.c[k]);
    cache.h[k] = go[k] * cache.tanh_c[k];
  }
  return cache;
}

CellInputGrads lstm_cell_backward(const LstmCellCache& cache,
                                  const RecurrentWeights& w,
                                  const Tensor& grad_h, const Tensor& grad_c,
                                  RecurrentWeightGrads& acc) {
  const CellDims d = check_cell(cache.x, cache.h_prev, w, 4);
  expect_shape(grad_h, cache.h.shape(), "lstm grad_h");
  expect_shape(grad_c, cache.c.shape(), "lstm grad_c");
  const auto& gi = cache.gates[kInputGate];
  const auto& gf = cache.gates[kForgetGate];
  const auto& gg = cache.gates[kCellGate];
  const auto& go = cache.gates[kOutputGate];

  CellInputGrads out{Tensor(cache.x.shape()), Tensor(cache.h_prev.shape()),
                     Tensor(cache.c_prev.shape())};
  std::array<Tensor, 4> da;
  for (auto& t : da) t = Tensor(cache.h.shape());
  for (std::size_t k = 0; k < cache.c.size(); ++k) {
    const float tc = cache.tanh_c[k];
    const float dc = grad_c[k] + grad_h[k] * go[k] * (1.0f - tc * tc);
    da[kOutputGate][k] = grad_h[k] * tc * go[k] * (1.0f - go[k]);
    da[kInputGate][k] = dc * gg[k] * gi[k] * (1.0f - gi[k]);
    da[kCellGate][k] = dc * gi[k] * (1.0f - gg[k] * gg[k]);
    da[kForgetGate][k] = dc * cache.c_prev[k] * gf[k] * (1.0f - gf[k]);
    out.c_prev[k] = dc * gf[k];
  }
  for (std::size_t g = 0; g < 4; ++g) {
    gate_backward(cache.x, cache.h_prev, da[g], w, d, g, acc, out.x, out.h_prev);
  }
  return out;
}

Tensor time_slice(const Tensor& seq, std::size_t t) {
  const std::size_t batch = seq.dim(0), steps = seq.dim(1), feat = seq.dim(2);
  Tensor out({batch, feat});
  for (std::size_t b = 0; b < batch; ++b) {
    const float* src = seq.data() + (b * steps + t) * feat;
    std::copy(src, src + feat, out.data() + b * feat);
  }
  return out;
}

namespace {

void scatter_step(Tensor& seq, std::size_t t, const Tensor& step) {
  const std::size_t batch = seq.dim(0), steps = seq.dim(1), feat = seq.dim(2);
  for (std::size_t b = 0; b < batch; ++b) {
    std::copy(step.data() + b * feat, step.data() + (b + 1) * feat,
              seq.data() + (b * steps + t) * feat);
  }
}

void add_step(Tensor& step, const Tensor& seq, std::size_t t) {
  const std::size_t batch = seq.dim(0), steps = seq.dim(1), feat = seq.dim(2);
  for (std::size_t b = 0; b < batch; ++b) {
    const float* src = seq.data() + (b * steps + t) * feat;
    float* dst = step.data() + b * feat;
    for (std::size_t k = 0; k < feat; ++k) dst[k] += src[k];
  }
}

}  // namespace

Tensor RecurrentLayer::forward(const ParamSet& params, const Tensor& input) {
  if (input.rank() != 3) {
    throw ShapeError("recurrent layer: expected [batch, steps, features], got " +
                     shape_to_string(input.shape()));
  }
  const RecurrentWeights w{params[blocks_.w_ih], params[blocks_.w_hh],
                           params[blocks_.b_ih], params[blocks_.b_hh]};
  const std::size_t batch = input.dim(0), steps = input.dim(1);
  input_shape_ = input.shape();
  inputs_.clear();
  hiddens_.clear();
  lstm_.clear();
  Tensor out({batch, steps, hidden_});
  Tensor h({batch, hidden_});
  Tensor c({batch, hidden_});
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor x = time_slice(input, t);
    if (type_ == CellType::kElman) {
      h = rnn_cell_forward(x, h, w);
      hiddens_.push_back(h);
    } else {
      LstmCellCache cache = lstm_cell_forward(x, h, c, w);
      h = cache.h;
      c = cache.c;
      lstm_.push_back(std::move(cache));
    }
    inputs_.push_back(std::move(x));
    scatter_step(out, t, h);
  }
  return out;
}

Tensor RecurrentLayer::backward(const ParamSet& params,
                                const Tensor& grad_output, Gradients& grads) {
  if (!input_shape_) throw NoForwardError("recurrent: backward before forward");
  const Shape& in_shape = *input_shape_;
  const std::size_t batch = in_shape[0], steps = in_shape[1];
  expect_shape(grad_output, {batch, steps, hidden_}, "recurrent grad_output");
  const RecurrentWeights w{params[blocks_.w_ih], params[blocks_.w_hh],
                           params[blocks_.b_ih], params[blocks_.b_hh]};
  RecurrentWeightGrads acc{grads[blocks_.w_ih], grads[blocks_.w_hh],
                           grads[blocks_.b_ih], grads[blocks_.b_hh]};
  Tensor dx_seq(in_shape);
  Tensor dh({batch, hidden_});
  Tensor dc({batch, hidden_});
  const Tensor zeros({batch, hidden_});
  for (std::size_t t = steps; t-- > 0;) {
    add_step(dh, grad_output, t);
    CellInputGrads g;
    if (type_ == CellType::kElman) {
      const Tensor& h_prev = t > 0 ? hiddens_[t - 1] : zeros;
      g = rnn_cell_backward(inputs_[t], h_prev, hiddens_[t], w, dh, acc);
    } else {
      g = lstm_cell_backward(lstm_[t], w, dh, dc, acc);
      dc = std::move(g.c_prev);
    }
    dh = std::move(g.h_prev);
    scatter_step(dx_seq, t, g.x);
  }
  return dx_seq;
}

Tensor LastStepLayer::forward(const ParamSet&, const Tensor& input) {
  if (input.rank() != 3) {
    throw ShapeError("last-step: expected [batch, steps, features], got " +
                     shape_to_string(input.shape()));
  }
  input_shape_ = input.shape();
  return time_slice(input, input.dim(1) - 1);
}

Tensor LastStepLayer::backward(const ParamSet&, const Tensor& grad_output,
                               Gradients&) {
  if (!input_shape_) throw NoForwardError("last-step: backward before forward");
  Tensor g(*input_shape_);
  scatter_step(g, g.dim(1) - 1, grad_output);
  return g;
}

}  // namespace vaecomp
