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

// Feed-forward layer kernels (dense, 2-D convolution, 2x2 max pooling and
// pointwise activations) and the stateful layer objects that record their
// inputs for the reverse pass.

#ifndef VAECOMP_LAYERS_HPP_
#define VAECOMP_LAYERS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vaecomp/param_set.hpp"
#include "vaecomp/tensor.hpp"

namespace vaecomp {

// Raised when backward() is called on a layer with no recorded forward pass.
class NoForwardError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---- dense -----------------------------------------------------------------

// output[b,j] = sum_i input[b,i] * weights[i,j] + bias[j]
Tensor dense_forward(const Tensor& input, const Tensor& weights,
                     const Tensor& bias);

struct DenseGrads {
  Tensor input;
  Tensor weights;
  Tensor bias;
};
DenseGrads dense_backward(const Tensor& input, const Tensor& weights,
                          const Tensor& grad_output);

// ---- convolution -----------------------------------------------------------

struct Padding2d {
  std::size_t top = 0;
  std::size_t bottom = 0;
  std::size_t left = 0;
  std::size_t right = 0;

  // Pads so that a stride-1 convolution with a k x k kernel keeps the spatial
  // size. For even k the extra row/column goes to the bottom/right.
  static Padding2d same(std::size_t k) {
    return {(k - 1) / 2, k / 2, (k - 1) / 2, k / 2};
  }
};

struct Conv2dOptions {
  std::size_t stride = 1;
  Padding2d pad;
};

// Output spatial extent; throws ShapeError if it is not a positive integer.
std::size_t conv_output_extent(std::size_t in, std::size_t pad_lo,
                               std::size_t pad_hi, std::size_t k,
                               std::size_t stride);

// Cross-correlation. input [b,cin,h,w], kernels [cout,cin,kh,kw], bias [cout].
Tensor conv2d_forward(const Tensor& input, const Tensor& kernels,
                      const Tensor& bias, const Conv2dOptions& options);

struct Conv2dGrads {
  Tensor input;
  Tensor kernels;
  Tensor bias;
};
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels,
                            const Conv2dOptions& options,
                            const Tensor& grad_output);

// ---- pooling ---------------------------------------------------------------

struct MaxPoolResult {
  Tensor output;
  // Flat input index of the winning element, one per output element.
  std::vector<std::uint32_t> argmax;
};

// Non-overlapping 2x2 max pool over [b,c,h,w]; h and w must be even.
MaxPoolResult maxpool2_forward(const Tensor& input);
Tensor maxpool2_backward(const Shape& input_shape,
                         std::span<const std::uint32_t> argmax,
                         const Tensor& grad_output);

// ---- activations -----------------------------------------------------------

Tensor relu(const Tensor& x);
Tensor tanh_activation(const Tensor& x);
Tensor sigmoid_activation(const Tensor& x);
float sigmoid(float x);

// ---- layer objects ---------------------------------------------------------

// A differentiable stage. Parameters live in a ParamSet; a layer only keeps
// block indices and whatever it recorded during the last forward pass.
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const ParamSet& params, const Tensor& input) = 0;
  // Accumulates parameter gradients into `grads` and returns d(loss)/d(input).
  virtual Tensor backward(const ParamSet& params, const Tensor& grad_output,
                          Gradients& grads) = 0;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(std::size_t weights, std::size_t bias)
      : weights_(weights), bias_(bias) {}
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  std::size_t weights_;
  std::size_t bias_;
  std::optional<Tensor> input_;
};

class Conv2dLayer final : public Layer {
 public:
  Conv2dLayer(std::size_t kernels, std::size_t bias, Conv2dOptions options)
      : kernels_(kernels), bias_(bias), options_(options) {}
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  std::size_t kernels_;
  std::size_t bias_;
  Conv2dOptions options_;
  std::optional<Tensor> input_;
};

class MaxPool2Layer final : public Layer {
 public:
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  std::optional<Shape> input_shape_;
  std::vector<std::uint32_t> argmax_;
};

class ReluLayer final : public Layer {
 public:
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  std::optional<Tensor> output_;
};

class TanhLayer final : public Layer {
 public:
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  std::optional<Tensor> output_;
};

// Reshapes to `shape` with the batch extent kept in front.
class ReshapeLayer final : public Layer {
 public:
  explicit ReshapeLayer(Shape per_item) : per_item_(std::move(per_item)) {}
  Tensor forward(const ParamSet& params, const Tensor& input) override;
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads) override;

 private:
  Shape per_item_;
  std::optional<Shape> input_shape_;
};

// Runs layers in order; backward walks them in reverse.
class Sequential {
 public:
  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor forward(const ParamSet& params, const Tensor& input);
  Tensor backward(const ParamSet& params, const Tensor& grad_output,
                  Gradients& grads);
  std::size_t size() const { return layers_.size(); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

}  // namespace vaecomp

#endif  // VAECOMP_LAYERS_HPP_
