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

#ifndef VAECOMP_SRC_EIGEN_MAP_HPP_
#define VAECOMP_SRC_EIGEN_MAP_HPP_

#include <Eigen/Core>

#include "vaecomp/tensor.hpp"

namespace vaecomp::detail {

using RowMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::RowVectorXf>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXf>;

inline MatrixMap as_matrix(float* data, std::size_t rows, std::size_t cols) {
  return MatrixMap(data, static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols));
}

inline ConstMatrixMap as_matrix(const float* data, std::size_t rows,
                                std::size_t cols) {
  return ConstMatrixMap(data, static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols));
}

// Views a tensor as [dim(0), numel / dim(0)].
inline MatrixMap as_matrix(Tensor& t) {
  return as_matrix(t.data(), t.dim(0), t.row_size());
}

inline ConstMatrixMap as_matrix(const Tensor& t) {
  return as_matrix(t.data(), t.dim(0), t.row_size());
}

inline VectorMap as_row(Tensor& t) {
  return VectorMap(t.data(), static_cast<Eigen::Index>(t.size()));
}

inline ConstVectorMap as_row(const Tensor& t) {
  return ConstVectorMap(t.data(), static_cast<Eigen::Index>(t.size()));
}

}  // namespace vaecomp::detail

#endif  // VAECOMP_SRC_EIGEN_MAP_HPP_
