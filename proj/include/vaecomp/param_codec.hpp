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

// Flattening a ParamSet into one sequence and cutting it into fixed-length,
// zero-padded chunks, plus the exact inverses.

#ifndef VAECOMP_PARAM_CODEC_HPP_
#define VAECOMP_PARAM_CODEC_HPP_

#include <cstddef>

#include "vaecomp/base_models.hpp"
#include "vaecomp/param_set.hpp"
#include "vaecomp/tensor.hpp"

namespace vaecomp {

inline constexpr std::size_t kDefaultChunkSize = 2048;

struct ChunkedParams {
  std::size_t chunk_size = kDefaultChunkSize;
  Tensor chunks;  // [n_chunks, chunk_size]
  std::size_t pad_len = 0;
  std::size_t total_len = 0;
  ModelKind kind = ModelKind::kFnn;

  std::size_t chunk_count() const { return chunks.rank() ? chunks.dim(0) : 0; }
  bool operator==(const ChunkedParams&) const = default;
};

// Blocks concatenated row-major in canonical order.
Tensor flatten(const ParamSet& params);

// ceil(n / chunk_size) chunks; the tail of the last chunk is zero.
ChunkedParams chunk(const Tensor& flat, std::size_t chunk_size = kDefaultChunkSize,
                    ModelKind kind = ModelKind::kFnn);

// Throws std::invalid_argument if the bookkeeping is inconsistent.
void check_chunked(const ChunkedParams& chunked);

// Chunks concatenated and truncated to total_len.
Tensor unchunk(const ChunkedParams& chunked);

// Splits a flat sequence back into the blocks of `spec`. Throws
// std::invalid_argument naming expected and actual lengths on mismatch.
ParamSet unflatten(const Tensor& flat, const BaseModelSpec& spec);

std::size_t chunk_count_for(std::size_t total_len, std::size_t chunk_size);

}  // namespace vaecomp

#endif  // VAECOMP_PARAM_CODEC_HPP_
