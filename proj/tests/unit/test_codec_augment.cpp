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

#include <cmath>
#include <set>

#include "test_support.hpp"
#include "vaecomp/augment.hpp"
#include "vaecomp/param_codec.hpp"

namespace vaecomp {
namespace {

TEST(Codec, ChunkCountsAndPadding) {
  // Oracle: ceil(n / 2048) and the zero tail that fills the last chunk.
  const std::pair<std::size_t, std::size_t> expected[] = {
      {185300, 91}, {122270, 60}, {54538, 27}, {214282, 105}};
  for (auto [n, chunks] : expected) EXPECT_EQ(chunk_count_for(n, 2048), chunks) << n;
  const ChunkedParams c = chunk(Tensor::from_values({1, 2, 3, 4, 5}), 2);
  EXPECT_EQ(c.chunk_count(), 3u);
  EXPECT_EQ(c.pad_len, 1u);
  EXPECT_EQ(c.chunks, Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 0}));
  EXPECT_EQ(unchunk(c), Tensor::from_values({1, 2, 3, 4, 5}));
  const ChunkedParams exact = chunk(Tensor::from_values({1, 2, 3, 4}), 2);
  EXPECT_EQ(exact.pad_len, 0u);
  EXPECT_THROW(chunk(Tensor({2, 2}), 2), ShapeError);
  EXPECT_THROW(chunk(Tensor::from_values({1}), 0), std::invalid_argument);
}

TEST(Codec, RejectsInconsistentBookkeeping) {
  ChunkedParams c = chunk(Tensor::from_values({1, 2, 3}), 2);
  c.pad_len = 0;
  EXPECT_THROW(unchunk(c), std::invalid_argument);
}

TEST(Codec, FlattenOrderIsBlockOrderRowMajor) {
  ParamSet p;
  p.add("a", Tensor::matrix(2, 2, {1, 2, 3, 4}));
  p.add("b", Tensor::from_values({5}));
  EXPECT_EQ(flatten(p), Tensor::from_values({1, 2, 3, 4, 5}));
}

TEST(Codec, UnflattenNamesLengthsOnMismatch) {
  try {
    unflatten(Tensor::from_values({1, 2}), model_spec(ModelKind::kRnn));
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("54538"), std::string::npos);
  }
}

TEST(Codec, IdentityOnBaseModelsAndRandomSets) {
  for (ModelKind k : base_kinds()) {
    EXPECT_TRUE(testing::codec_identity(build_model(k, 1).params, 2048)) << kind_name(k);
  }
  for (std::uint64_t s = 0; s < 100; ++s) {
    const ParamSet p = testing::random_param_set(s);
    EXPECT_TRUE(testing::codec_identity(p, 1 + s % 37)) << "seed " << s;
  }
}

TEST(Augment, PerturbsRequestedFractionWithSeededNoise) {
  const Tensor flat = testing::random_tensor({1000}, 3);
  AugmentConfig cfg;
  cfg.n_train = 8;
  cfg.n_val = 2;
  const VariantSet v = generate_variants(flat, cfg);
  ASSERT_EQ(v.train.size(), 8u);
  ASSERT_EQ(v.val.size(), 2u);
  EXPECT_EQ(perturbed_positions(1000, 0.3), 300u);
  std::set<std::vector<float>> distinct;
  for (const auto* group : {&v.train, &v.val}) {
    for (const Tensor& t : *group) {
      std::size_t changed = 0;
      double sq = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] != flat[i]) {
          ++changed;
          const double d = static_cast<double>(t[i]) - flat[i];
          sq += d * d;
        }
      }
      EXPECT_LE(changed, 300u);
      EXPECT_GE(changed, 290u);
      const double stddev = std::sqrt(sq / changed);
      EXPECT_NEAR(stddev, 0.01, 0.002);
      distinct.insert(std::vector<float>(t.storage().begin(), t.storage().end()));
    }
  }
  EXPECT_EQ(distinct.size(), 10u);
  const VariantSet again = generate_variants(flat, cfg);
  EXPECT_EQ(again.train, v.train);
  cfg.seed += 1;
  EXPECT_NE(generate_variants(flat, cfg).train, v.train);
}

TEST(Augment, ZeroNoiseGivesCopies) {
  const Tensor flat = testing::random_tensor({50}, 3);
  AugmentConfig cfg;
  cfg.noise_stddev = 0.0;
  for (const Tensor& t : generate_variants(flat, cfg).train) EXPECT_EQ(t, flat);
}

TEST(Augment, RejectsBadConfig) {
  AugmentConfig cfg;
  cfg.position_fraction = 0.0;
  EXPECT_THROW(generate_variants(Tensor::from_values({1}), cfg), std::invalid_argument);
  cfg = {};
  cfg.noise_stddev = -1.0;
  EXPECT_THROW(generate_variants(Tensor::from_values({1}), cfg), std::invalid_argument);
  EXPECT_THROW(generate_variants(Tensor({0}), AugmentConfig{}), std::invalid_argument);
}

TEST(Augment, SplitCheck) {
  EXPECT_TRUE(split_check(80, 20).ok);
  EXPECT_DOUBLE_EQ(split_check(80, 20).ratio, 4.0);
  EXPECT_FALSE(split_check(70, 20).ok);
  EXPECT_FALSE(split_check(80, 0).ok);
  EXPECT_TRUE(std::isinf(split_check(80, 0).ratio));
}

}  // namespace
}  // namespace vaecomp
