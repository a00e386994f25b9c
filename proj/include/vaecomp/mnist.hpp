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

// Reader/writer for the raw MNIST IDX files and shuffled mini-batching.

#ifndef VAECOMP_MNIST_HPP_
#define VAECOMP_MNIST_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vaecomp/tensor.hpp"

namespace vaecomp {

inline constexpr std::uint32_t kIdxImageMagic = 2051;  // 0x00000803
inline constexpr std::uint32_t kIdxLabelMagic = 2049;  // 0x00000801
inline constexpr std::size_t kImageSide = 28;
inline constexpr std::size_t kNumClasses = 10;

struct MnistDataset {
  Tensor images;                      // [n, 28, 28], byte / 255
  std::vector<std::uint8_t> labels;  // n values in [0, 10)

  std::size_t size() const { return labels.size(); }
};

struct MnistSplits {
  MnistDataset train;
  MnistDataset test;
};

// Parses an IDX3 image file. Throws FormatError with the byte offset on a
// bad magic, non-28 dimensions or a truncated body.
Tensor read_idx_images(std::span<const std::uint8_t> bytes);
// Parses an IDX1 label file; label bytes above 9 are rejected.
std::vector<std::uint8_t> read_idx_labels(std::span<const std::uint8_t> bytes);

// Inverse of the readers. Pixels are stored as round(value * 255).
std::vector<std::uint8_t> write_idx_images(const Tensor& images);
std::vector<std::uint8_t> write_idx_labels(std::span<const std::uint8_t> labels);

// Loads train-images-idx3-ubyte, train-labels-idx1-ubyte,
// t10k-images-idx3-ubyte and t10k-labels-idx1-ubyte from `dir`.
MnistSplits load_mnist(const std::filesystem::path& dir);
MnistDataset load_mnist_pair(const std::filesystem::path& images,
                             const std::filesystem::path& labels);

MnistDataset subset(const MnistDataset& data, std::span<const std::size_t> indices);

// Deterministic shuffled partition of [0, n) into batches of `batch_size`;
// the last batch may be short.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  std::size_t batch_count() const { return bounds_.size(); }
  std::span<const std::size_t> batch(std::size_t i) const;
  std::span<const std::size_t> order() const { return order_; }

 private:
  std::vector<std::size_t> order_;
  std::vector<std::pair<std::size_t, std::size_t>> bounds_;
};

struct Batch {
  Tensor images;
  std::vector<std::uint8_t> labels;
};

Batch make_batch(const MnistDataset& data, std::span<const std::size_t> indices);

// Iterates the batches of a dataset for one shuffled pass.
std::vector<Batch> batches(const MnistDataset& data, std::size_t batch_size,
                           std::uint64_t seed);

}  // namespace vaecomp

#endif  // VAECOMP_MNIST_HPP_
