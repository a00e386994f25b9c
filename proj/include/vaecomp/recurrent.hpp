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

// Elman (tanh) and LSTM cells plus sequence layers built from them.
//
// Weight layout (x * W convention, two bias vectors per layer):
//   Elman: w_ih [in, hid], w_hh [hid, hid], b_ih [hid], b_hh [hid]
//   LSTM:  w_ih [4, in, hid], w_hh [4, hid, hid], b_ih [4, hid], b_hh [4, hid]
//          with gate slabs ordered input, forget, cell candidate, output.

#ifndef VAECOMP_RECURRENT_HPP_
#define VAECOMP_RECURRENT_HPP_

#include <array>
#include <optional>
#include <vector>

#include "vaecomp/layers.hpp"

namespace vaecomp {

struct RecurrentWeights {
  const Tensor& w_ih;
  const Tensor& w_hh;
  const Tensor& b_ih;
  const Tensor& b_hh;
};

// Accumulation targets for weight gradients; same shapes as RecurrentWeights.
struct RecurrentWeightGrads {
  Tensor& w_ih;
  Tensor& w_hh;
  Tensor& b_ih;
  Tensor& b_hh;
};

struct CellInputGrads {
  Tensor x;
  Tensor h_prev;
  Tensor c_prev;  // empty for the Elman cell
};

// h_t = tanh(x_t w_ih + h_prev w_hh + b_ih + b_hh)
Tensor rnn_cell_forward(const Tensor& x, const Tensor& h_prev,
                        const RecurrentWeights& w);
CellInputGrads rnn_cell_backward(const Tensor& x, const Tensor& h_prev,
                                 const Tensor& h, const RecurrentWeights& w,
                                 const Tensor& grad_h,
                                 RecurrentWeightGrads& acc);

enum LstmGate : std::size_t { kInputGate = 0, kForgetGate, kCellGate, kOutputGate };

struct LstmCellCache {
  Tensor x;
  Tensor h_prev;
  Tensor c_prev;
  std::array<Tensor, 4> gates;  // post-activation i, f, g, o
  Tensor c;
  Tensor tanh_c;
  Tensor h;
};

LstmCellCache lstm_cell_forward(const Tensor& x, const Tensor& h_prev,
                                const Tensor& c_prev,
                                const RecurrentWeights& w);
CellInputGrads lstm_cell_backward(const LstmCellCache& cache,
                                  const RecurrentWeights& w,
                                  const Tensor& grad_h, const Tensor& grad_c,
                                  RecurrentWeightGrads& acc);

enum class CellType { kElman, kLstm };

struct RecurrentBlocks {
  std::size_t w_ih;
  std::size_t w_hh;
  std::size_t b_ih;
  std::size_t b_hh;
};

// Runs a cell over [batch, steps, features] from a zero initial state and
// returns every hidden state as [batch, steps, hidden].
class RecurrentLayer final : public Layer {
 public:
  RecurrentLayer(CellType type, RecurrentBlocks blocks, std::size_t hidden)
      : type_(type), blocks_(blocks), hidden_(hidden) {}
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  CellType type_;
  RecurrentBlocks blocks_;
  std::size_t hidden_;
  std::optional<Shape> input_shape_;
  std::vector<Tensor> inputs_;   // x_t, per step
  std::vector<Tensor> hiddens_;  // h_t, per step (Elman)
  std::vector<LstmCellCache> lstm_;
};

// [batch, steps, features] -> [batch, features] at the final step.
class LastStepLayer final : public Layer {
 public:
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  std::optional<Shape> input_shape_;
};

// Slices step t of [batch, steps, features] into [batch, features].
Tensor time_slice(const Tensor& seq, std::size_t t);

}  // namespace vaecomp

#endif  // VAECOMP_RECURRENT_HPP_
