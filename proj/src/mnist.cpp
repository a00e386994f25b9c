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

#include "vaecomp/mnist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "vaecomp/byte_io.hpp"

namespace vaecomp {

Tensor read_idx_images(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::uint32_t magic = r.u32_be("image magic");
  if (magic == kIdxLabelMagic) throw FormatError("label magic in image file", 0);
  if (magic != kIdxImageMagic) {
    throw FormatError("bad image magic " + std::to_string(magic) +
                          ", expected 2051",
                      0);
  }
  const std::uint32_t n = r.u32_be("image count");
  const std::size_t rows_at = r.offset();
  const std::uint32_t rows = r.u32_be("row count");
  const std::uint32_t cols = r.u32_be("column count");
  if (rows != kImageSide || cols != kImageSide) {
    throw FormatError("image dimensions " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", expected 28x28",
                      rows_at);
  }
  const std::size_t pixels = kImageSide * kImageSide;
  auto body = r.take(static_cast<std::size_t>(n) * pixels, "image body");
  Tensor images({n, kImageSide, kImageSide});
  for (std::size_t i = 0; i < body.size(); ++i) {
    images[i] = static_cast<float>(body[i]) / 255.0f;
  }
  return images;
}

std::vector<std::uint8_t> read_idx_labels(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::uint32_t magic = r.u32_be("label magic");
  if (magic == kIdxImageMagic) throw FormatError("image magic in label file", 0);
  if (magic != kIdxLabelMagic) {
    throw FormatError("bad label magic " + std::to_string(magic) +
                          ", expected 2049",
                      0);
  }
  const std::uint32_t n = r.u32_be("label count");
  const std::size_t body_at = r.offset();
  auto body = r.take(n, "label body");
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i] >= kNumClasses) {
      throw FormatError("label value " + std::to_string(body[i]) +
                            " out of range [0,9]",
                        body_at + i);
    }
  }
  return {body.begin(), body.end()};
}

std::vector<std::uint8_t> write_idx_images(const Tensor& images) {
  if (images.rank() != 3 || images.dim(1) != kImageSide ||
      images.dim(2) != kImageSide) {
    throw ShapeError("write_idx_images: expected [n,28,28], got " +
                     shape_to_string(images.shape()));
  }
  ByteWriter w;
  w.u32_be(kIdxImageMagic);
  w.u32_be(static_cast<std::uint32_t>(images.dim(0)));
  w.u32_be(kImageSide);
  w.u32_be(kImageSide);
  for (float v : images.values()) {
    w.u8(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  }
  return w.release();
}

std::vector<std::uint8_t> write_idx_labels(std::span<const std::uint8_t> labels) {
  ByteWriter w;
  w.u32_be(kIdxLabelMagic);
  w.u32_be(static_cast<std::uint32_t>(labels.size()));
  w.raw(labels);
  return w.release();
}

MnistDataset load_mnist_pair(const std::filesystem::path& images,
                             const std::filesystem::path& labels) {
  MnistDataset d;
  try {
    d.images = read_idx_images(read_file(images));
  } catch (const FormatError& e) {
    throw std::runtime_error(images.string() + ": " + e.what());
  }
  try {
    d.labels = read_idx_labels(read_file(labels));
  } catch (const FormatError& e) {
    throw std::runtime_error(labels.string() + ": " + e.what());
  }
  if (d.images.dim(0) != d.labels.size()) {
    throw std::runtime_error(images.string() + " holds " +
                             std::to_string(d.images.dim(0)) + " images but " +
                             labels.string() + " holds " +
                             std::to_string(d.labels.size()) + " labels");
  }
  return d;
}

MnistSplits load_mnist(const std::filesystem::path& dir) {
  return {load_mnist_pair(dir / "train-images-idx3-ubyte",
                          dir / "train-labels-idx1-ubyte"),
          load_mnist_pair(dir / "t10k-images-idx3-ubyte",
                          dir / "t10k-labels-idx1-ubyte")};
}

MnistDataset subset(const MnistDataset& data, std::span<const std::size_t> indices) {
  MnistDataset out;
  out.images = gather_rows(data.images, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(data.labels.at(i));
  return out;
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size,
                           std::uint64_t seed)
    : order_(n) {
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order_.begin(), order_.end(), rng);
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    bounds_.emplace_back(begin, std::min(n, begin + batch_size));
  }
}

std::span<const std::size_t> BatchSampler::batch(std::size_t i) const {
  const auto [begin, end] = bounds_.at(i);
  return std::span<const std::size_t>(order_).subspan(begin, end - begin);
}

Batch make_batch(const MnistDataset& data, std::span<const std::size_t> indices) {
  Batch b{gather_rows(data.images, indices), {}};
  b.labels.reserve(indices.size());
  for (std::size_t i : indices) b.labels.push_back(data.labels[i]);
  return b;
}

std::vector<Batch> batches(const MnistDataset& data, std::size_t batch_size,
                           std::uint64_t seed) {
  BatchSampler sampler(data.size(), batch_size, seed);
  std::vector<Batch> out;
  out.reserve(sampler.batch_count());
  for (std::size_t i = 0; i < sampler.batch_count(); ++i) {
    out.push_back(make_batch(data, sampler.batch(i)));
  }
  return out;
}

}  // namespace vaecomp
