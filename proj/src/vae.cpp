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

#include "vaecomp/vae.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "vaecomp/mnist.hpp"
#include "vaecomp/optimizer.hpp"

namespace vaecomp {

namespace {

std::size_t encoder_block(std::size_t layer) { return 2 * layer; }

struct Heads {
  std::size_t mu_w, mu_b, lv_w, lv_b, decoder_begin;
};

Heads head_blocks(const VaeArchitecture& arch) {
  const std::size_t l = arch.hidden.size();
  return {2 * l, 2 * l + 1, 2 * l + 2, 2 * l + 3, 2 * l + 4};
}

float clamped_exp(float logvar) {
  return std::exp(std::clamp(logvar, -kLogvarClamp, kLogvarClamp));
}

bool in_clamp(float logvar) {
  return logvar >= -kLogvarClamp && logvar <= kLogvarClamp;
}

void fill_normal(Tensor& t, std::mt19937_64& rng) {
  std::normal_distribution<float> dist(0.0f, 1.0f);
  for (float& v : t.values()) v = dist(rng);
}

}  // namespace

std::vector<std::pair<std::string, Shape>> vae_blocks(const VaeArchitecture& arch) {
  if (arch.chunk_size == 0 || arch.latent_dim == 0) {
    throw std::invalid_argument("vae: chunk_size and latent_dim must be positive");
  }
  std::vector<std::pair<std::string, Shape>> blocks;
  auto dense = [&](const std::string& name, std::size_t in, std::size_t out) {
    blocks.emplace_back(name + ".weight", Shape{in, out});
    blocks.emplace_back(name + ".bias", Shape{out});
  };
  std::size_t width = arch.chunk_size;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    dense("enc" + std::to_string(i + 1), width, arch.hidden[i]);
    width = arch.hidden[i];
  }
  dense("mu", width, arch.latent_dim);
  dense("logvar", width, arch.latent_dim);
  width = arch.latent_dim;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    const std::size_t out = arch.hidden[arch.hidden.size() - 1 - i];
    dense("dec" + std::to_string(i + 1), width, out);
    width = out;
  }
  dense("out", width, arch.chunk_size);
  return blocks;
}

VaeParams::VaeParams(VaeArchitecture arch, ParamSet params)
    : arch_(std::move(arch)), params_(std::move(params)) {
  const auto blocks = vae_blocks(arch_);
  if (params_.kind() != ModelKind::kVae || params_.block_count() != blocks.size()) {
    throw ShapeError("vae: parameter set does not match architecture (" +
                     std::to_string(params_.block_count()) + " blocks, need " +
                     std::to_string(blocks.size()) + ")");
  }
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = params_.block(i);
    if (b.name != blocks[i].first || b.value.shape() != blocks[i].second) {
      throw ShapeError("vae block " + std::to_string(i) + ": expected " +
                       blocks[i].first + shape_to_string(blocks[i].second) +
                       ", got " + b.name + shape_to_string(b.value.shape()));
    }
  }
}

VaeParams VaeParams::initialize(const VaeArchitecture& arch, std::uint64_t seed) {
  ParamSet p(ModelKind::kVae);
  std::mt19937_64 rng(seed);
  std::size_t fan_in = 1;
  for (auto& [name, shape] : vae_blocks(arch)) {
    if (shape.size() == 2) fan_in = shape[0];
    const float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
    std::uniform_real_distribution<float> dist(-bound, bound);
    Tensor t(shape);
    for (float& v : t.values()) v = dist(rng);
    p.add(name, std::move(t));
  }
  return VaeParams(arch, std::move(p));
}

WeightFile VaeParams::to_weight_file() const {
  return {params_, VaeHeader{static_cast<std::uint32_t>(arch_.chunk_size),
                             static_cast<std::uint32_t>(arch_.latent_dim)}};
}

VaeParams VaeParams::from_weight_file(const WeightFile& file) {
  if (file.params.kind() != ModelKind::kVae || !file.vae) {
    throw std::invalid_argument("weight file does not hold a VAE (kind " +
                                std::string(kind_name(file.params.kind())) + ")");
  }
  VaeArchitecture arch;
  arch.chunk_size = file.vae->chunk_size;
  arch.latent_dim = file.vae->latent_dim;
  arch.hidden.clear();
  for (std::size_t i = 1;; ++i) {
    const auto idx = file.params.find("enc" + std::to_string(i) + ".weight");
    if (!idx) break;
    arch.hidden.push_back(file.params[*idx].dim(1));
  }
  return VaeParams(std::move(arch), file.params);
}

VaeNetwork::VaeNetwork(const VaeArchitecture& arch)
    : arch_(arch),
      mu_head_(head_blocks(arch).mu_w, head_blocks(arch).mu_b),
      logvar_head_(head_blocks(arch).lv_w, head_blocks(arch).lv_b) {
  for (std::size_t i = 0; i < arch.hidden.size(); ++i) {
    trunk_.emplace<DenseLayer>(encoder_block(i), encoder_block(i) + 1);
    trunk_.emplace<ReluLayer>();
  }
  std::size_t block = head_blocks(arch).decoder_begin;
  for (std::size_t i = 0; i < arch.hidden.size(); ++i, block += 2) {
    decoder_.emplace<DenseLayer>(block, block + 1);
    decoder_.emplace<ReluLayer>();
  }
  decoder_.emplace<DenseLayer>(block, block + 1);
}

EncoderOutput VaeNetwork::encode(const ParamSet& params, const Tensor& x) {
  if (x.rank() != 2 || x.dim(1) != arch_.chunk_size) {
    throw ShapeError("vae encode: expected [batch, " +
                     std::to_string(arch_.chunk_size) + "], got " +
                     shape_to_string(x.shape()));
  }
  const Tensor h = trunk_.forward(params, x);
  return {mu_head_.forward(params, h), logvar_head_.forward(params, h)};
}

Tensor VaeNetwork::decode(const ParamSet& params, const Tensor& z) {
  if (z.rank() != 2 || z.dim(1) != arch_.latent_dim) {
    throw ShapeError("vae decode: expected [batch, " +
                     std::to_string(arch_.latent_dim) + "], got " +
                     shape_to_string(z.shape()));
  }
  return decoder_.forward(params, z);
}

Tensor VaeNetwork::decode_backward(const ParamSet& params,
                                   const Tensor& grad_x_hat, Gradients& grads) {
  return decoder_.backward(params, grad_x_hat, grads);
}

void VaeNetwork::encode_backward(const ParamSet& params, const Tensor& grad_mu,
                                 const Tensor& grad_logvar, Gradients& grads) {
  Tensor dh = mu_head_.backward(params, grad_mu, grads);
  const Tensor dh_lv = logvar_head_.backward(params, grad_logvar, grads);
  for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh_lv[i];
  trunk_.backward(params, dh, grads);
}

EncoderOutput encode(const Tensor& x, const VaeParams& vae) {
  VaeNetwork net(vae.architecture());
  return net.encode(vae.params(), x);
}

Tensor decode(const Tensor& z, const VaeParams& vae) {
  VaeNetwork net(vae.architecture());
  return net.decode(vae.params(), z);
}

Tensor reparameterize(const Tensor& mu, const Tensor& logvar, const Tensor& eps) {
  expect_shape(logvar, mu.shape(), "reparameterize logvar");
  expect_shape(eps, mu.shape(), "reparameterize eps");
  Tensor z(mu.shape());
  for (std::size_t i = 0; i < z.size(); ++i) {
    z[i] = mu[i] + std::sqrt(clamped_exp(logvar[i])) * eps[i];
  }
  return z;
}

double kl_divergence(const Tensor& mu, const Tensor& logvar) {
  expect_shape(logvar, mu.shape(), "kl_divergence logvar");
  double kl = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu[i];
    const double lv = logvar[i];
    kl += 0.5 * (m * m + static_cast<double>(clamped_exp(logvar[i])) - 1.0 - lv);
  }
  return kl;
}

ElboBreakdown elbo_loss(const Tensor& x, const Tensor& x_hat, const Tensor& mu,
                        const Tensor& logvar, double recon_sigma) {
  expect_shape(x_hat, x.shape(), "elbo x_hat");
  if (!(recon_sigma > 0.0)) throw std::invalid_argument("elbo: recon_sigma must be > 0");
  double sq = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - x_hat[i];
    sq += d * d;
  }
  ElboBreakdown b;
  b.reconstruction = sq / (2.0 * recon_sigma * recon_sigma);
  b.kl = kl_divergence(mu, logvar);
  b.total = b.reconstruction + b.kl;
  return b;
}

ElboBreakdown elbo_forward_backward(VaeNetwork& net, const ParamSet& params,
                                    const Tensor& x, const Tensor& eps,
                                    double recon_sigma, Gradients* grads) {
  const EncoderOutput enc = net.encode(params, x);
  const Tensor z = reparameterize(enc.mu, enc.logvar, eps);
  const Tensor x_hat = net.decode(params, z);
  const ElboBreakdown loss = elbo_loss(x, x_hat, enc.mu, enc.logvar, recon_sigma);
  if (!grads) return loss;

  const float inv_var = static_cast<float>(1.0 / (recon_sigma * recon_sigma));
  Tensor d_x_hat(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) d_x_hat[i] = (x_hat[i] - x[i]) * inv_var;
  const Tensor dz = net.decode_backward(params, d_x_hat, *grads);

  Tensor d_mu(enc.mu.shape());
  Tensor d_logvar(enc.mu.shape());
  for (std::size_t i = 0; i < dz.size(); ++i) {
    const float lv = enc.logvar[i];
    const bool live = in_clamp(lv);
    const float var = clamped_exp(lv);
    const float sigma = std::sqrt(var);
    d_mu[i] = dz[i] + enc.mu[i];
    d_logvar[i] = (live ? dz[i] * eps[i] * 0.5f * sigma + 0.5f * var : 0.0f) - 0.5f;
  }
  net.encode_backward(params, d_mu, d_logvar, *grads);
  return loss;
}

ElboBreakdown evaluate_elbo(const VaeParams& vae, const Tensor& data,
                            double recon_sigma, std::uint64_t seed) {
  constexpr std::size_t kBatch = 256;
  VaeNetwork net(vae.architecture());
  std::mt19937_64 rng(seed);
  ElboBreakdown sum;
  const std::size_t n = data.dim(0);
  std::vector<std::size_t> idx;
  for (std::size_t begin = 0; begin < n; begin += kBatch) {
    const std::size_t end = std::min(n, begin + kBatch);
    idx.resize(end - begin);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = begin + i;
    const Tensor x = gather_rows(data, idx);
    Tensor eps({idx.size(), vae.architecture().latent_dim});
    fill_normal(eps, rng);
    const ElboBreakdown b =
        elbo_forward_backward(net, vae.params(), x, eps, recon_sigma, nullptr);
    sum.reconstruction += b.reconstruction;
    sum.kl += b.kl;
    sum.total += b.total;
  }
  if (n > 0) {
    sum.reconstruction /= static_cast<double>(n);
    sum.kl /= static_cast<double>(n);
    sum.total /= static_cast<double>(n);
  }
  return sum;
}

VaeTrainResult train_vae(const Tensor& train, const Tensor& val,
                         const VaeArchitecture& arch,
                         const VaeTrainConfig& config,
                         const VaeEpochCallback& on_epoch) {
  ScopedFlushDenormals flush_denormals;
  if (train.rank() != 2 || train.dim(1) != arch.chunk_size || train.dim(0) == 0) {
    throw ShapeError("train_vae: training chunks must be [n>0, " +
                     std::to_string(arch.chunk_size) + "], got " +
                     shape_to_string(train.shape()));
  }
  if (val.rank() != 2 || val.dim(1) != arch.chunk_size || val.dim(0) == 0) {
    throw ShapeError("train_vae: validation chunks must be [m>0, " +
                     std::to_string(arch.chunk_size) + "], got " +
                     shape_to_string(val.shape()));
  }
  const auto start = std::chrono::steady_clock::now();
  VaeParams vae = VaeParams::initialize(arch, config.seed);
  VaeNetwork net(arch);
  Adam adam(AdamConfig{config.learning_rate});
  Gradients grads(vae.params());
  std::mt19937_64 noise_rng(config.seed ^ 0xa5a5a5a5ULL);
  const std::uint64_t val_seed = config.seed ^ 0x7a17ULL;

  VaeTrainResult result;
  result.best = vae;
  result.best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    BatchSampler sampler(train.dim(0), config.batch_size, config.seed + epoch);
    ElboBreakdown sum;
    for (std::size_t bi = 0; bi < sampler.batch_count(); ++bi) {
      const auto idx = sampler.batch(bi);
      const Tensor x = gather_rows(train, idx);
      Tensor eps({idx.size(), arch.latent_dim});
      fill_normal(eps, noise_rng);
      grads.zero();
      const ElboBreakdown b = elbo_forward_backward(net, vae.params(), x, eps,
                                                    config.recon_sigma, &grads);
      if (!std::isfinite(b.total)) throw NonFiniteLoss("vae: non-finite training loss", epoch);
      sum.reconstruction += b.reconstruction;
      sum.kl += b.kl;
      sum.total += b.total;
      adam.step(vae.params(), grads);
    }
    VaeEpochRecord rec;
    rec.epoch = epoch;
    const double n = static_cast<double>(train.dim(0));
    rec.train_loss = sum.total / n;
    rec.train_reconstruction = sum.reconstruction / n;
    rec.train_kl = sum.kl / n;
    const ElboBreakdown v = evaluate_elbo(vae, val, config.recon_sigma, val_seed);
    if (!std::isfinite(v.total)) throw NonFiniteLoss("vae: non-finite validation loss", epoch);
    rec.val_loss = v.total;
    rec.val_reconstruction = v.reconstruction;
    rec.val_kl = v.kl;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec);

    if (v.total < result.best_val_loss) {
      result.best_val_loss = v.total;
      result.best = vae;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::vector<SweepRow> latent_sweep(
    const Tensor& train, const Tensor& val, const std::vector<std::size_t>& sizes,
    VaeArchitecture arch, const VaeTrainConfig& config,
    const std::function<double(const VaeParams&)>& accuracy_of,
    const VaeEpochCallback& on_epoch) {
  if (sizes.empty()) throw std::invalid_argument("latent_sweep: no latent sizes given");
  std::vector<SweepRow> rows;
  for (std::size_t d : sizes) {
    arch.latent_dim = d;
    SweepRow row;
    row.latent_dim = d;
    row.result = train_vae(train, val, arch, config, on_epoch);
    row.epochs = row.result.curve.size();
    row.best_epoch = row.result.best_epoch;
    row.best_val_loss = row.result.best_val_loss;
    row.seconds = row.result.seconds;
    if (accuracy_of) row.accuracy = accuracy_of(row.result.best);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace vaecomp
