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

// "NNWT" weight container.
//
//   magic     4 bytes  "NNWT"
//   version   u16 LE   (1)
//   kind      u8       1 fnn, 2 cnn, 3 rnn, 4 lstm, 5 vae
//   [vae only] chunk_size u32 LE, latent_dim u32 LE
//   blocks    u32 LE
//   per block:
//     name_len u16 LE, name (UTF-8, name_len bytes)
//     rank u8, extents u32 LE x rank
//     payload f32 LE x product(extents)

#ifndef VAECOMP_WEIGHTS_IO_HPP_
#define VAECOMP_WEIGHTS_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "vaecomp/param_set.hpp"

namespace vaecomp {

inline constexpr std::uint16_t kWeightFileVersion = 1;

struct VaeHeader {
  std::uint32_t chunk_size = 0;
  std::uint32_t latent_dim = 0;

  bool operator==(const VaeHeader&) const = default;
};

struct WeightFile {
  ParamSet params;
  std::optional<VaeHeader> vae;  // present iff params.kind() == kVae

  bool operator==(const WeightFile&) const = default;
};

std::vector<std::uint8_t> encode_weights(const WeightFile& file);
// Throws FormatError (with byte offset) on bad magic, unknown version or
// kind, or truncation.
WeightFile decode_weights(std::span<const std::uint8_t> bytes);

void save_weights(const std::filesystem::path& path, const WeightFile& file);
WeightFile load_weights(const std::filesystem::path& path);

}  // namespace vaecomp

#endif  // VAECOMP_WEIGHTS_IO_HPP_
