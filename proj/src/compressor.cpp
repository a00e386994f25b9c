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

#include "vaecomp/compressor.hpp"

#include <stdexcept>
#include <string>

#include "vaecomp/byte_io.hpp"
#include "vaecomp/param_codec.hpp"

namespace vaecomp {

namespace {
constexpr std::string_view kMagic = "VAEC";
}  // namespace

std::size_t LatentArchive::parameter_count() const {
  return static_cast<std::size_t>(n_chunks) * chunk_size - pad_len;
}

LatentArchive compress(const ParamSet& params, const VaeParams& vae) {
  if (params.kind() == ModelKind::kVae) {
    throw std::invalid_argument("compress: cannot compress a VAE parameter set");
  }
  const VaeArchitecture& arch = vae.architecture();
  const ChunkedParams chunked = chunk(flatten(params), arch.chunk_size, params.kind());
  LatentArchive a;
  a.kind = params.kind();
  a.chunk_size = static_cast<std::uint32_t>(arch.chunk_size);
  a.latent_dim = static_cast<std::uint32_t>(arch.latent_dim);
  a.n_chunks = static_cast<std::uint32_t>(chunked.chunk_count());
  a.pad_len = static_cast<std::uint32_t>(chunked.pad_len);
  a.latents = encode(chunked.chunks, vae).mu;
  return a;
}

ParamSet decompress(const LatentArchive& archive, const VaeParams& vae,
                    const BaseModelSpec& spec) {
  const VaeArchitecture& arch = vae.architecture();
  if (archive.kind != spec.kind) {
    throw std::invalid_argument("decompress: archive holds " +
                                std::string(kind_name(archive.kind)) +
                                " but model is " + std::string(kind_name(spec.kind)));
  }
  if (archive.chunk_size != arch.chunk_size || archive.latent_dim != arch.latent_dim) {
    throw std::invalid_argument(
        "decompress: archive chunk/latent " + std::to_string(archive.chunk_size) +
        "/" + std::to_string(archive.latent_dim) + " does not match VAE " +
        std::to_string(arch.chunk_size) + "/" + std::to_string(arch.latent_dim));
  }
  if (archive.parameter_count() != spec.parameter_count()) {
    throw std::invalid_argument(
        "decompress: archive describes " + std::to_string(archive.parameter_count()) +
        " parameters, model needs " + std::to_string(spec.parameter_count()));
  }
  expect_shape(archive.latents, {archive.n_chunks, archive.latent_dim},
               "decompress latents");
  ChunkedParams chunked;
  chunked.chunk_size = archive.chunk_size;
  chunked.chunks = decode(archive.latents, vae);
  chunked.pad_len = archive.pad_len;
  chunked.total_len = archive.parameter_count();
  chunked.kind = archive.kind;
  return unflatten(unchunk(chunked), spec);
}

double expected_compression_rate(std::size_t parameter_count,
                                 std::size_t chunk_size, std::size_t latent_dim) {
  const std::size_t stored = chunk_count_for(parameter_count, chunk_size) * latent_dim;
  return static_cast<double>(parameter_count) / static_cast<double>(stored);
}

double compression_rate(const LatentArchive& a) {
  return static_cast<double>(a.parameter_count()) /
         (static_cast<double>(a.n_chunks) * a.latent_dim);
}

std::size_t decoder_parameter_count(const VaeParams& vae) {
  std::size_t n = 0;
  for (const auto& b : vae.params().blocks()) {
    if (b.name.starts_with("dec") || b.name.starts_with("out.")) n += b.value.size();
  }
  return n;
}

double compression_rate_with_decoder(const LatentArchive& a, const VaeParams& vae) {
  return static_cast<double>(a.parameter_count()) /
         (static_cast<double>(a.n_chunks) * a.latent_dim +
          static_cast<double>(decoder_parameter_count(vae)));
}

std::vector<std::uint8_t> encode_archive(const LatentArchive& a) {
  expect_shape(a.latents, {a.n_chunks, a.latent_dim}, "archive latents");
  ByteWriter w;
  w.raw(kMagic);
  w.u16_le(kArchiveVersion);
  w.u8(static_cast<std::uint8_t>(a.kind));
  w.u32_le(a.chunk_size);
  w.u32_le(a.latent_dim);
  w.u32_le(a.n_chunks);
  w.u32_le(a.pad_len);
  w.f32_le_array(a.latents.values());
  return w.release();
}

LatentArchive decode_archive(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw FormatError("bad magic, expected VAEC", 0);
  }
  const std::size_t version_at = r.offset();
  const std::uint16_t version = r.u16_le("version");
  if (version != kArchiveVersion) {
    throw FormatError("unsupported VAEC version " + std::to_string(version), version_at);
  }
  const std::size_t kind_at = r.offset();
  const auto kind = kind_from_tag(r.u8("kind tag"));
  if (!kind || *kind == ModelKind::kVae) throw FormatError("bad kind tag", kind_at);
  LatentArchive a;
  a.kind = *kind;
  const std::size_t header_at = r.offset();
  a.chunk_size = r.u32_le("chunk_size");
  a.latent_dim = r.u32_le("latent_dim");
  a.n_chunks = r.u32_le("n_chunks");
  a.pad_len = r.u32_le("pad_len");
  if (a.chunk_size == 0 || a.latent_dim == 0 ||
      (a.n_chunks > 0 && a.pad_len >= a.chunk_size)) {
    throw FormatError("inconsistent VAEC header", header_at);
  }
  const std::size_t count = static_cast<std::size_t>(a.n_chunks) * a.latent_dim;
  const std::size_t payload_at = r.offset();
  if (count > r.remaining() / 4) {
    throw FormatError("truncated latents: header declares " +
                          std::to_string(a.n_chunks) + " chunks, payload holds " +
                          std::to_string(r.remaining() / 4 / a.latent_dim),
                      payload_at);
  }
  a.latents = Tensor({a.n_chunks, a.latent_dim});
  r.f32_le_array(a.latents.values(), "latents");
  if (r.remaining() != 0) throw FormatError("trailing bytes after latents", r.offset());
  return a;
}

void save_archive(const std::filesystem::path& path, const LatentArchive& archive) {
  write_file(path, encode_archive(archive));
}

LatentArchive load_archive(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_archive(bytes);
  } catch (const FormatError& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace vaecomp
