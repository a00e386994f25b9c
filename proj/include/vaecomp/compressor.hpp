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

// Compressing a parameter set into per-chunk latent means and rebuilding a
// runnable parameter set from them.
//
// "VAEC" archive layout (all little-endian):
//   magic 4 bytes "VAEC", version u16, kind tag u8, chunk_size u32,
//   latent_dim u32, n_chunks u32, pad_len u32,
//   then n_chunks * latent_dim f32 in chunk order.

#ifndef VAECOMP_COMPRESSOR_HPP_
#define VAECOMP_COMPRESSOR_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vaecomp/base_models.hpp"
#include "vaecomp/param_set.hpp"
#include "vaecomp/vae.hpp"

namespace vaecomp {

inline constexpr std::uint16_t kArchiveVersion = 1;

struct LatentArchive {
  ModelKind kind = ModelKind::kFnn;
  std::uint32_t chunk_size = 0;
  std::uint32_t latent_dim = 0;
  std::uint32_t n_chunks = 0;
  std::uint32_t pad_len = 0;
  Tensor latents;  // [n_chunks, latent_dim], encoder means

  // n_chunks * chunk_size - pad_len
  std::size_t parameter_count() const;
  bool operator==(const LatentArchive&) const = default;
};

// Encodes every chunk of flatten(params) and keeps the means (no sampling).
LatentArchive compress(const ParamSet& params, const VaeParams& vae);

// Decodes each latent, drops the padding tail and rebuilds the blocks of `spec`.
ParamSet decompress(const LatentArchive& archive, const VaeParams& vae,
                    const BaseModelSpec& spec);

// Original element count over stored latent element count (decoder excluded).
double compression_rate(const LatentArchive& archive);
// Same, but the decoder's parameters are charged to the archive.
double compression_rate_with_decoder(const LatentArchive& archive,
                                     const VaeParams& vae);
std::size_t decoder_parameter_count(const VaeParams& vae);

// Rate for a parameter count without building an archive.
double expected_compression_rate(std::size_t parameter_count,
                                 std::size_t chunk_size, std::size_t latent_dim);

std::vector<std::uint8_t> encode_archive(const LatentArchive& archive);
// Throws FormatError with the byte offset on bad magic, version, kind,
// inconsistent header or truncated payload.
LatentArchive decode_archive(std::span<const std::uint8_t> bytes);

void save_archive(const std::filesystem::path& path, const LatentArchive& archive);
LatentArchive load_archive(const std::filesystem::path& path);

}  // namespace vaecomp

#endif  // VAECOMP_COMPRESSOR_HPP_
