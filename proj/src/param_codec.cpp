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

#include "vaecomp/param_codec.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace vaecomp {

Tensor flatten(const ParamSet& params) {
  FloatBuffer flat;
  flat.reserve(params.parameter_count());
  for (const auto& b : params.blocks()) {
    flat.insert(flat.end(), b.value.storage().begin(), b.value.storage().end());
  }
  const std::size_t n = flat.size();
  return Tensor({n}, std::move(flat));
}

std::size_t chunk_count_for(std::size_t total_len, std::size_t chunk_size) {
  if (chunk_size == 0) throw std::invalid_argument("chunk size must be >= 1");
  return (total_len + chunk_size - 1) / chunk_size;
}

ChunkedParams chunk(const Tensor& flat, std::size_t chunk_size, ModelKind kind) {
  if (flat.rank() != 1) {
    throw ShapeError("chunk: expected a flat sequence, got " +
                     shape_to_string(flat.shape()));
  }
  const std::size_t n = flat.size();
  const std::size_t count = chunk_count_for(n, chunk_size);
  ChunkedParams c;
  c.chunk_size = chunk_size;
  c.total_len = n;
  c.pad_len = count * chunk_size - n;
  c.kind = kind;
  c.chunks = Tensor({count, chunk_size});
  std::copy(flat.data(), flat.data() + n, c.chunks.data());
  return c;
}

void check_chunked(const ChunkedParams& c) {
  const std::size_t count = c.chunk_count();
  std::string problem;
  if (c.chunk_size == 0) {
    problem = "chunk_size is 0";
  } else if (c.chunks.size() != count * c.chunk_size ||
             (count > 0 && c.chunks.row_size() != c.chunk_size)) {
    problem = "chunk tensor " + shape_to_string(c.chunks.shape()) +
              " does not match chunk_size " + std::to_string(c.chunk_size);
  } else if (c.pad_len >= c.chunk_size && count > 0) {
    problem = "pad_len " + std::to_string(c.pad_len) + " >= chunk_size";
  } else if (c.total_len + c.pad_len != count * c.chunk_size) {
    problem = "total_len " + std::to_string(c.total_len) + " + pad_len " +
              std::to_string(c.pad_len) + " != " + std::to_string(count) +
              " chunks x " + std::to_string(c.chunk_size);
  }
  if (!problem.empty()) throw std::invalid_argument("inconsistent chunking: " + problem);
}

Tensor unchunk(const ChunkedParams& c) {
  check_chunked(c);
  FloatBuffer flat(c.chunks.data(), c.chunks.data() + c.total_len);
  return Tensor({c.total_len}, std::move(flat));
}

ParamSet unflatten(const Tensor& flat, const BaseModelSpec& spec) {
  const std::size_t expected = spec.parameter_count();
  if (flat.size() != expected) {
    throw std::invalid_argument("unflatten: expected " + std::to_string(expected) +
                                " values for " + std::string(kind_name(spec.kind)) +
                                ", got " + std::to_string(flat.size()));
  }
  ParamSet p(spec.kind);
  std::size_t offset = 0;
  for (const auto& b : spec.blocks) {
    const std::size_t n = shape_numel(b.shape);
    FloatBuffer values(flat.data() + offset, flat.data() + offset + n);
    p.add(b.name, Tensor(b.shape, std::move(values)));
    offset += n;
  }
  return p;
}

}  // namespace vaecomp
