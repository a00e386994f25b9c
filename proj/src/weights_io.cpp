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

#include "vaecomp/weights_io.hpp"

#include <limits>
#include <string>

#include "vaecomp/byte_io.hpp"

namespace vaecomp {

namespace {
constexpr std::string_view kMagic = "NNWT";
}  // namespace

std::vector<std::uint8_t> encode_weights(const WeightFile& file) {
  const ParamSet& p = file.params;
  if ((p.kind() == ModelKind::kVae) != file.vae.has_value()) {
    throw std::invalid_argument("NNWT: VAE header must be present exactly for kind vae");
  }
  ByteWriter w;
  w.raw(kMagic);
  w.u16_le(kWeightFileVersion);
  w.u8(static_cast<std::uint8_t>(p.kind()));
  if (file.vae) {
    w.u32_le(file.vae->chunk_size);
    w.u32_le(file.vae->latent_dim);
  }
  w.u32_le(static_cast<std::uint32_t>(p.block_count()));
  for (const ParamBlock& b : p.blocks()) {
    if (b.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw std::invalid_argument("NNWT: block name too long: " + b.name);
    }
    w.u16_le(static_cast<std::uint16_t>(b.name.size()));
    w.raw(b.name);
    w.u8(static_cast<std::uint8_t>(b.value.rank()));
    for (std::size_t e : b.value.shape()) w.u32_le(static_cast<std::uint32_t>(e));
    w.f32_le_array(b.value.values());
  }
  return w.release();
}

WeightFile decode_weights(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw FormatError("bad magic, expected NNWT", 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint16_t version = r.u16_le("version");
  if (version != kWeightFileVersion) {
    throw FormatError("unsupported NNWT version " + std::to_string(version), version_at);
  }
  const std::size_t kind_at = r.offset();
  const auto kind = kind_from_tag(r.u8("kind tag"));
  if (!kind) throw FormatError("unknown kind tag", kind_at);

  WeightFile file{ParamSet(*kind), std::nullopt};
  if (*kind == ModelKind::kVae) {
    VaeHeader h;
    h.chunk_size = r.u32_le("chunk_size");
    h.latent_dim = r.u32_le("latent_dim");
    file.vae = h;
  }
  const std::uint32_t count = r.u32_le("block count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16_le("block name length");
    auto name_bytes = r.take(name_len, "block name");
    std::string name(name_bytes.begin(), name_bytes.end());
    const std::uint8_t rank = r.u8("block rank");
    Shape shape(rank);
    std::size_t numel = 1;
    for (auto& e : shape) {
      e = r.u32_le("block extent");
      numel *= e;
    }
    const std::size_t payload_at = r.offset();
    if (numel > r.remaining() / 4) {
      throw FormatError("truncated payload for block '" + name + "'", payload_at);
    }
    Tensor t(shape);
    r.f32_le_array(t.values(), "block payload");
    if (file.params.find(name)) {
      throw FormatError("duplicate block name '" + name + "'", payload_at);
    }
    file.params.add(std::move(name), std::move(t));
  }
  if (r.remaining() != 0) {
    throw FormatError("trailing bytes after last block", r.offset());
  }
  return file;
}

void save_weights(const std::filesystem::path& path, const WeightFile& file) {
  write_file(path, encode_weights(file));
}

WeightFile load_weights(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_weights(bytes);
  } catch (const FormatError& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace vaecomp
