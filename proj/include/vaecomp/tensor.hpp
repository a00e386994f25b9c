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

#ifndef VAECOMP_TENSOR_HPP_
#define VAECOMP_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vaecomp {

using Shape = std::vector<std::size_t>;

// Cache-line aligned allocation, so vectorized kernels always take the same
// code path and results do not depend on where the heap placed a buffer.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, std::size_t) { ::operator delete(p, kAlignment); }

  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using FloatBuffer = std::vector<float, AlignedAllocator<float>>;

// Thrown when operand extents do not conform. The message carries both shapes.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

// Dense row-major array of 32-bit floats with its extents.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, FloatBuffer data);
  Tensor(Shape shape, const std::vector<float>& data);

  static Tensor from_values(std::initializer_list<float> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<float> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  const FloatBuffer& storage() const { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  float& at(std::size_t r, std::size_t c);
  float at(std::size_t r, std::size_t c) const;

  // Rows of the leading axis, viewed as flat spans.
  std::span<float> row(std::size_t r);
  std::span<const float> row(std::size_t r) const;
  std::size_t row_size() const;

  // Same data, new extents; numel must match.
  Tensor reshaped(Shape shape) const;
  void reshape(Shape shape);

  void fill(float value);
  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  FloatBuffer data_;
};

// Throws ShapeError unless `t` has exactly `expected` extents.
void expect_shape(const Tensor& t, const Shape& expected, const char* what);

// Copies rows `indices` of the leading axis into a new tensor.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> indices);

// Concatenates tensors along the leading axis; trailing extents must agree.
Tensor concat_rows(std::span<const Tensor> parts);

}  // namespace vaecomp

#endif  // VAECOMP_TENSOR_HPP_
