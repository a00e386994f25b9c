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

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "test_support.hpp"
#include "vaecomp/byte_io.hpp"
#include "vaecomp/mnist.hpp"

namespace vaecomp {
namespace {

std::vector<std::uint8_t> tiny_images() {
  ByteWriter w;
  w.u32_be(kIdxImageMagic);
  w.u32_be(2);
  w.u32_be(28);
  w.u32_be(28);
  for (int i = 0; i < 2 * 28 * 28; ++i) w.u8(static_cast<std::uint8_t>(i % 256));
  return w.release();
}

std::vector<std::uint8_t> tiny_labels(std::uint8_t second) {
  ByteWriter w;
  w.u32_be(kIdxLabelMagic);
  w.u32_be(2);
  w.u8(7);
  w.u8(second);
  return w.release();
}

TEST(Idx, ReadsImagesScaledToUnitInterval) {
  const Tensor images = read_idx_images(tiny_images());
  EXPECT_EQ(images.shape(), (Shape{2, 28, 28}));
  EXPECT_FLOAT_EQ(images[0], 0.0f);
  EXPECT_FLOAT_EQ(images[255], 1.0f);
  EXPECT_FLOAT_EQ(images[256 + 51], 51.0f / 255.0f);
}

TEST(Idx, ReadsLabels) {
  EXPECT_EQ(read_idx_labels(tiny_labels(3)), (std::vector<std::uint8_t>{7, 3}));
}

TEST(Idx, RejectsWrongMagicWithOffset) {
  std::vector<std::uint8_t> bytes = tiny_images();
  bytes[3] = 0x01;  // label magic in an image file
  try {
    read_idx_images(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  EXPECT_THROW(read_idx_labels(tiny_images()), FormatError);
}

TEST(Idx, RejectsTruncationAndBadLabels) {
  std::vector<std::uint8_t> bytes = tiny_images();
  bytes.resize(bytes.size() - 1);
  EXPECT_THROW(read_idx_images(bytes), FormatError);
  try {
    read_idx_labels(tiny_labels(12));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 9u);
  }
}

TEST(Idx, WriteReadRoundTrip) {
  const MnistDataset d = testing::synthetic_digits(30, 5);
  EXPECT_EQ(read_idx_images(write_idx_images(d.images)), d.images);
  EXPECT_EQ(read_idx_labels(write_idx_labels(d.labels)), d.labels);
}

TEST(Idx, LoadMnistDirectoryReportsMissingFile) {
  const auto dir = std::filesystem::temp_directory_path() / "vaecomp_mnist_missing";
  std::filesystem::remove_all(dir);
  try {
    load_mnist(dir);
    FAIL();
  } catch (const std::exception& e) {
    EXPECT_NE(std::string(e.what()).find("train-images-idx3-ubyte"), std::string::npos);
  }
}

TEST(BatchSampler, CoversEveryIndexOnceAndIsSeeded) {
  BatchSampler a(103, 10, 42);
  BatchSampler b(103, 10, 42);
  BatchSampler c(103, 10, 43);
  EXPECT_EQ(a.batch_count(), 11u);
  EXPECT_EQ(a.batch(10).size(), 3u);
  std::set<std::size_t> seen(a.order().begin(), a.order().end());
  EXPECT_EQ(seen.size(), 103u);
  EXPECT_TRUE(std::equal(a.order().begin(), a.order().end(), b.order().begin()));
  EXPECT_FALSE(std::equal(a.order().begin(), a.order().end(), c.order().begin()));
  EXPECT_THROW(BatchSampler(10, 0, 1), std::invalid_argument);
}

TEST(Batches, MakeBatchGathersImagesAndLabels) {
  const MnistDataset d = testing::synthetic_digits(20, 1);
  const std::vector<std::size_t> idx = {3, 17};
  const Batch b = make_batch(d, idx);
  EXPECT_EQ(b.images.shape(), (Shape{2, 28, 28}));
  EXPECT_EQ(b.labels, (std::vector<std::uint8_t>{3, 7}));
  EXPECT_EQ(batches(d, 8, 1).size(), 3u);
}

}  // namespace
}  // namespace vaecomp
