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

#include "vaecomp/layers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "eigen_map.hpp"

namespace vaecomp {

using detail::as_matrix;
using detail::as_row;

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     shape_to_string(t.shape()));
  }
}

struct ConvGeometry {
  std::size_t batch, cin, h, w, cout, kh, kw, oh, ow;
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& kernels,
                           const Conv2dOptions& opt) {
  require_rank(input, 4, "conv2d input");
  require_rank(kernels, 4, "conv2d kernels");
  if (opt.stride == 0) throw ShapeError("conv2d: stride must be positive");
  if (kernels.dim(1) != input.dim(1)) {
    throw ShapeError("conv2d: kernel input channels " +
                     shape_to_string(kernels.shape()) +
                     " do not match input " + shape_to_string(input.shape()));
  }
  ConvGeometry g{};
  g.batch = input.dim(0);
  g.cin = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.cout = kernels.dim(0);
  g.kh = kernels.dim(2);
  g.kw = kernels.dim(3);
  g.oh = conv_output_extent(g.h, opt.pad.top, opt.pad.bottom, g.kh, opt.stride);
  g.ow = conv_output_extent(g.w, opt.pad.left, opt.pad.right, g.kw, opt.stride);
  return g;
}

// col[(c*kh + ki)*kw + kj, oy*ow + ox] = padded input at the tap.
void im2col(const float* image, const ConvGeometry& g, const Conv2dOptions& opt,
            float* col) {
  const std::size_t spatial = g.oh * g.ow;
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        float* dst = col + ((c * g.kh + ki) * g.kw + kj) * spatial;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * opt.stride + ki) -
                                   static_cast<std::ptrdiff_t>(opt.pad.top);
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t x =
                static_cast<std::ptrdiff_t>(ox * opt.stride + kj) -
                static_cast<std::ptrdiff_t>(opt.pad.left);
            const bool inside = y >= 0 && x >= 0 &&
                                y < static_cast<std::ptrdiff_t>(g.h) &&
                                x < static_cast<std::ptrdiff_t>(g.w);
            dst[oy * g.ow + ox] =
                inside ? image[(c * g.h + static_cast<std::size_t>(y)) * g.w +
                               static_cast<std::size_t>(x)]
                       : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* col, const ConvGeometry& g, const Conv2dOptions& opt,
            float* image) {
  const std::size_t spatial = g.oh * g.ow;
  for (std::size_t c = 0; c < g.cin; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const float* src = col + ((c * g.kh + ki) * g.kw + kj) * spatial;
        for (std::size_t oy = 0; oy < g.oh; ++oy) {
          const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(oy * opt.stride + ki) -
                                   static_cast<std::ptrdiff_t>(opt.pad.top);
          if (y < 0 || y >= static_cast<std::ptrdiff_t>(g.h)) continue;
          for (std::size_t ox = 0; ox < g.ow; ++ox) {
            const std::ptrdiff_t x =
                static_cast<std::ptrdiff_t>(ox * opt.stride + kj) -
                static_cast<std::ptrdiff_t>(opt.pad.left);
            if (x < 0 || x >= static_cast<std::ptrdiff_t>(g.w)) continue;
            image[(c * g.h + static_cast<std::size_t>(y)) * g.w +
                  static_cast<std::size_t>(x)] += src[oy * g.ow + ox];
          }
        }
      }
    }
  }
}

const Tensor& recorded(const std::optional<Tensor>& t, const char* layer) {
  if (!t) throw NoForwardError(std::string(layer) + ": backward before forward");
  return *t;
}

}  // namespace

// ---- dense -----------------------------------------------------------------

Tensor dense_forward(const Tensor& input, const Tensor& weights,
                     const Tensor& bias) {
  require_rank(input, 2, "dense input");
  require_rank(weights, 2, "dense weights");
  require_rank(bias, 1, "dense bias");
  if (input.dim(1) != weights.dim(0) || weights.dim(1) != bias.dim(0)) {
    throw ShapeError("dense: input " + shape_to_string(input.shape()) +
                     " x weights " + shape_to_string(weights.shape()) +
                     " + bias " + shape_to_string(bias.shape()) +
                     " do not conform");
  }
  Tensor out({input.dim(0), weights.dim(1)});
  auto y = as_matrix(out);
  y.noalias() = as_matrix(input) * as_matrix(weights);
  y.rowwise() += as_row(bias);
  return out;
}

DenseGrads dense_backward(const Tensor& input, const Tensor& weights,
                          const Tensor& grad_output) {
  expect_shape(grad_output, {input.dim(0), weights.dim(1)}, "dense grad_output");
  DenseGrads g{Tensor(input.shape()), Tensor(weights.shape()),
               Tensor({weights.dim(1)})};
  const auto dy = as_matrix(grad_output);
  as_matrix(g.input).noalias() = dy * as_matrix(weights).transpose();
  as_matrix(g.weights).noalias() = as_matrix(input).transpose() * dy;
  as_row(g.bias) = dy.colwise().sum();
  return g;
}

// ---- convolution -----------------------------------------------------------

std::size_t conv_output_extent(std::size_t in, std::size_t pad_lo,
                               std::size_t pad_hi, std::size_t k,
                               std::size_t stride) {
  const std::size_t padded = in + pad_lo + pad_hi;
  if (stride == 0 || padded < k || (padded - k) % stride != 0) {
    throw ShapeError("conv2d: extent " + std::to_string(in) + " with padding " +
                     std::to_string(pad_lo) + "+" + std::to_string(pad_hi) +
                     ", kernel " + std::to_string(k) + ", stride " +
                     std::to_string(stride) +
                     " does not give an integer output extent");
  }
  return (padded - k) / stride + 1;
}

Tensor conv2d_forward(const Tensor& input, const Tensor& kernels,
                      const Tensor& bias, const Conv2dOptions& options) {
  const ConvGeometry g = conv_geometry(input, kernels, options);
  expect_shape(bias, {g.cout}, "conv2d bias");
  const std::size_t taps = g.cin * g.kh * g.kw;
  const std::size_t spatial = g.oh * g.ow;
  Tensor out({g.batch, g.cout, g.oh, g.ow});
  FloatBuffer col(taps * spatial);
  const auto k = as_matrix(kernels.data(), g.cout, taps);
  const auto b = detail::ConstVectorMap(bias.data(), static_cast<Eigen::Index>(g.cout));
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(input.data() + n * g.cin * g.h * g.w, g, options, col.data());
    auto y = as_matrix(out.data() + n * g.cout * spatial, g.cout, spatial);
    y.noalias() = k * as_matrix(col.data(), taps, spatial);
    y.colwise() += b.transpose();
  }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernels,
                            const Conv2dOptions& options,
                            const Tensor& grad_output) {
  const ConvGeometry g = conv_geometry(input, kernels, options);
  expect_shape(grad_output, {g.batch, g.cout, g.oh, g.ow}, "conv2d grad_output");
  const std::size_t taps = g.cin * g.kh * g.kw;
  const std::size_t spatial = g.oh * g.ow;
  Conv2dGrads grads{Tensor(input.shape()), Tensor(kernels.shape()),
                    Tensor({g.cout})};
  FloatBuffer col(taps * spatial);
  FloatBuffer dcol(taps * spatial);
  const auto k = as_matrix(kernels.data(), g.cout, taps);
  auto dk = as_matrix(grads.kernels.data(), g.cout, taps);
  auto db = detail::VectorMap(grads.bias.data(), static_cast<Eigen::Index>(g.cout));
  for (std::size_t n = 0; n < g.batch; ++n) {
    im2col(input.data() + n * g.cin * g.h * g.w, g, options, col.data());
    const auto dy = as_matrix(grad_output.data() + n * g.cout * spatial, g.cout,
                              spatial);
    dk.noalias() += dy * as_matrix(col.data(), taps, spatial).transpose();
    db += dy.rowwise().sum().transpose();
    as_matrix(dcol.data(), taps, spatial).noalias() = k.transpose() * dy;
    col2im(dcol.data(), g, options,
           grads.input.data() + n * g.cin * g.h * g.w);
  }
  return grads;
}

// ---- pooling ---------------------------------------------------------------

MaxPoolResult maxpool2_forward(const Tensor& input) {
  require_rank(input, 4, "maxpool2 input");
  const std::size_t planes = input.dim(0) * input.dim(1);
  const std::size_t h = input.dim(2);
  const std::size_t w = input.dim(3);
  if (h % 2 != 0 || w % 2 != 0) {
    throw ShapeError("maxpool2: spatial extents must be even, got " +
                     shape_to_string(input.shape()));
  }
  const std::size_t oh = h / 2;
  const std::size_t ow = w / 2;
  MaxPoolResult r{Tensor({input.dim(0), input.dim(1), oh, ow}), {}};
  r.argmax.resize(r.output.size());
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t base = p * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = base + (2 * oy) * w + 2 * ox;
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const std::size_t idx = base + (2 * oy + dy) * w + 2 * ox + dx;
            if (input[idx] > input[best]) best = idx;
          }
        }
        const std::size_t o = (p * oh + oy) * ow + ox;
        r.output[o] = input[best];
        r.argmax[o] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return r;
}

Tensor maxpool2_backward(const Shape& input_shape,
                         std::span<const std::uint32_t> argmax,
                         const Tensor& grad_output) {
  if (argmax.size() != grad_output.size()) {
    throw ShapeError("maxpool2 backward: " + std::to_string(argmax.size()) +
                     " recorded positions for grad of shape " +
                     shape_to_string(grad_output.shape()));
  }
  Tensor grad(input_shape);
  for (std::size_t o = 0; o < argmax.size(); ++o) grad[argmax[o]] += grad_output[o];
  return grad;
}

// ---- activations -----------------------------------------------------------

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.values()) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor tanh_activation(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.values()) v = std::tanh(v);
  return y;
}

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

Tensor sigmoid_activation(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.values()) v = sigmoid(v);
  return y;
}

// ---- layer objects ---------------------------------------------------------

Tensor DenseLayer::forward(const ParamSet& params, const Tensor& input) {
  input_ = input;
  return dense_forward(input, params[weights_], params[bias_]);
}

Tensor DenseLayer::backward(const ParamSet& params, const Tensor& grad_output,
                            Gradients& grads) {
  const Tensor& x = recorded(input_, "dense");
  DenseGrads g = dense_backward(x, params[weights_], grad_output);
  as_row(grads[weights_]) += as_row(g.weights);
  as_row(grads[bias_]) += as_row(g.bias);
  return std::move(g.input);
}

Tensor Conv2dLayer::forward(const ParamSet& params, const Tensor& input) {
  input_ = input;
  return conv2d_forward(input, params[kernels_], params[bias_], options_);
}

Tensor Conv2dLayer::backward(const ParamSet& params, const Tensor& grad_output,
                             Gradients& grads) {
  const Tensor& x = recorded(input_, "conv2d");
  Conv2dGrads g = conv2d_backward(x, params[kernels_], options_, grad_output);
  as_row(grads[kernels_]) += as_row(g.kernels);
  as_row(grads[bias_]) += as_row(g.bias);
  return std::move(g.input);
}

Tensor MaxPool2Layer::forward(const ParamSet&, const Tensor& input) {
  MaxPoolResult r = maxpool2_forward(input);
  input_shape_ = input.shape();
  argmax_ = std::move(r.argmax);
  return std::move(r.output);
}

Tensor MaxPool2Layer::backward(const ParamSet&, const Tensor& grad_output,
                               Gradients&) {
  if (!input_shape_) throw NoForwardError("maxpool2: backward before forward");
  return maxpool2_backward(*input_shape_, argmax_, grad_output);
}

Tensor ReluLayer::forward(const ParamSet&, const Tensor& input) {
  output_ = relu(input);
  return *output_;
}

Tensor ReluLayer::backward(const ParamSet&, const Tensor& grad_output,
                           Gradients&) {
  const Tensor& y = recorded(output_, "relu");
  expect_shape(grad_output, y.shape(), "relu grad_output");
  Tensor dx = grad_output;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (y[i] <= 0.0f) dx[i] = 0.0f;
  }
  return dx;
}

Tensor TanhLayer::forward(const ParamSet&, const Tensor& input) {
  output_ = tanh_activation(input);
  return *output_;
}

Tensor TanhLayer::backward(const ParamSet&, const Tensor& grad_output,
                           Gradients&) {
  const Tensor& y = recorded(output_, "tanh");
  expect_shape(grad_output, y.shape(), "tanh grad_output");
  Tensor dx = grad_output;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= 1.0f - y[i] * y[i];
  return dx;
}

Tensor ReshapeLayer::forward(const ParamSet&, const Tensor& input) {
  input_shape_ = input.shape();
  Shape shape{input.dim(0)};
  shape.insert(shape.end(), per_item_.begin(), per_item_.end());
  return input.reshaped(std::move(shape));
}

Tensor ReshapeLayer::backward(const ParamSet&, const Tensor& grad_output,
                              Gradients&) {
  if (!input_shape_) throw NoForwardError("reshape: backward before forward");
  return grad_output.reshaped(*input_shape_);
}

Tensor Sequential::forward(const ParamSet& params, const Tensor& input) {
  Tensor x = input;
  for (auto& layer : layers_) x = layer->forward(params, x);
  return x;
}

Tensor Sequential::backward(const ParamSet& params, const Tensor& grad_output,
                            Gradients& grads) {
  Tensor g = grad_output;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = (*it)->backward(params, g, grads);
  }
  return g;
}

}  // namespace vaecomp
