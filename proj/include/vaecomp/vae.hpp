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

// Fully-connected variational autoencoder over fixed-length parameter chunks.
//
//   encoder  chunk -> 512 -> 256 (ReLU) -> { mu: d, logvar: d }   (linear heads)
//   sample   z = mu + exp(logvar / 2) * eps,  eps ~ N(0, I)
//   decoder  d -> 256 -> 512 (ReLU) -> chunk                       (linear output)
//
// The loss is the negative ELBO with a Gaussian decoder of fixed standard
// deviation sigma_x and a standard-normal prior:
//
//   reconstruction = sum (x - x_hat)^2 / (2 sigma_x^2)
//   kl             = sum 1/2 (mu^2 + exp(logvar) - 1 - logvar)
//
// both summed over the batch and latent/chunk dimensions. logvar is clamped to
// [-20, 20] wherever it is exponentiated.

#ifndef VAECOMP_VAE_HPP_
#define VAECOMP_VAE_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include "vaecomp/layers.hpp"
#include "vaecomp/param_set.hpp"
#include "vaecomp/weights_io.hpp"

namespace vaecomp {

inline constexpr std::size_t kDefaultLatentDim = 64;
inline constexpr float kLogvarClamp = 20.0f;

struct VaeArchitecture {
  std::size_t chunk_size = 2048;
  std::size_t latent_dim = kDefaultLatentDim;
  std::vector<std::size_t> hidden = {512, 256};  // decoder mirrors this

  bool operator==(const VaeArchitecture&) const = default;
};

class VaeParams {
 public:
  VaeParams() = default;
  // Validates that `params` has exactly the blocks implied by `arch`.
  VaeParams(VaeArchitecture arch, ParamSet params);

  // Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static VaeParams initialize(const VaeArchitecture& arch, std::uint64_t seed);

  const VaeArchitecture& architecture() const { return arch_; }
  const ParamSet& params() const { return params_; }
  ParamSet& params() { return params_; }

  WeightFile to_weight_file() const;
  // Recovers hidden widths from the block shapes.
  static VaeParams from_weight_file(const WeightFile& file);

  bool operator==(const VaeParams&) const = default;

 private:
  VaeArchitecture arch_;
  ParamSet params_{ModelKind::kVae};
};

// Block names and shapes for an architecture, in canonical order.
std::vector<std::pair<std::string, Shape>> vae_blocks(const VaeArchitecture& arch);

struct EncoderOutput {
  Tensor mu;
  Tensor logvar;
};

struct ElboBreakdown {
  double reconstruction = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

// Differentiable encoder/decoder graph. Each forward call records what the
// matching backward call needs.
class VaeNetwork {
 public:
  explicit VaeNetwork(const VaeArchitecture& arch);

  EncoderOutput encode(const ParamSet& params, const Tensor& x);
  Tensor decode(const ParamSet& params, const Tensor& z);

  // Returns d(loss)/dz.
  Tensor decode_backward(const ParamSet& params, const Tensor& grad_x_hat,
                         Gradients& grads);
  void encode_backward(const ParamSet& params, const Tensor& grad_mu,
                       const Tensor& grad_logvar, Gradients& grads);

 private:
  VaeArchitecture arch_;
  Sequential trunk_;
  DenseLayer mu_head_;
  DenseLayer logvar_head_;
  Sequential decoder_;
};

// Deterministic encoder means/log-variances for x [batch, chunk_size].
EncoderOutput encode(const Tensor& x, const VaeParams& vae);
// z = mu + exp(0.5 * logvar) * eps
Tensor reparameterize(const Tensor& mu, const Tensor& logvar, const Tensor& eps);
// Linear-output reconstruction for z [batch, latent_dim].
Tensor decode(const Tensor& z, const VaeParams& vae);

// Closed-form KL(N(mu, exp(logvar)) || N(0, I)) summed over all entries.
double kl_divergence(const Tensor& mu, const Tensor& logvar);

ElboBreakdown elbo_loss(const Tensor& x, const Tensor& x_hat, const Tensor& mu,
                        const Tensor& logvar, double recon_sigma = 1.0);

// Full pass for one batch: encode, sample with the supplied eps, decode and
// score. When `grads` is non-null, accumulates d(total)/d(params) into it.
ElboBreakdown elbo_forward_backward(VaeNetwork& net, const ParamSet& params,
                                    const Tensor& x, const Tensor& eps,
                                    double recon_sigma, Gradients* grads);

struct VaeTrainConfig {
  std::size_t max_epochs = 500;
  std::size_t patience = 25;
  std::size_t batch_size = 64;
  float learning_rate = 1e-3f;
  double recon_sigma = 0.01;  // sigma_x of the Gaussian decoder
  std::uint64_t seed = 11;
};

struct VaeEpochRecord {
  std::size_t epoch = 0;  // 1-based
  // Per-chunk averages of the negative ELBO and its parts.
  double train_loss = 0.0;
  double train_reconstruction = 0.0;
  double train_kl = 0.0;
  double val_loss = 0.0;
  double val_reconstruction = 0.0;
  double val_kl = 0.0;
  double seconds = 0.0;
};

struct VaeTrainResult {
  VaeParams best;  // parameters at the lowest validation loss
  std::vector<VaeEpochRecord> curve;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
  double seconds = 0.0;
};

using VaeEpochCallback = std::function<void(const VaeEpochRecord&)>;

class NonFiniteLoss : public std::runtime_error {
 public:
  NonFiniteLoss(const std::string& what, std::size_t epoch)
      : std::runtime_error(what + " at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

// Trains on pooled chunks train [n, chunk_size], validating on val
// [m, chunk_size] with a fixed noise draw. Stops at max_epochs or after
// `patience` epochs without a lower validation loss.
VaeTrainResult train_vae(const Tensor& train, const Tensor& val,
                         const VaeArchitecture& arch,
                         const VaeTrainConfig& config,
                         const VaeEpochCallback& on_epoch = {});

// Average per-chunk negative ELBO of `data` with noise drawn from `seed`.
ElboBreakdown evaluate_elbo(const VaeParams& vae, const Tensor& data,
                            double recon_sigma, std::uint64_t seed);

struct SweepRow {
  std::size_t latent_dim = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  double accuracy = 0.0;
  double seconds = 0.0;
  VaeTrainResult result;
};

// One VAE per latent size with otherwise identical config and seeds.
// `accuracy_of` scores the trained VAE downstream.
std::vector<SweepRow> latent_sweep(
    const Tensor& train, const Tensor& val, const std::vector<std::size_t>& sizes,
    VaeArchitecture arch, const VaeTrainConfig& config,
    const std::function<double(const VaeParams&)>& accuracy_of,
    const VaeEpochCallback& on_epoch = {});

}  // namespace vaecomp

#endif  // VAECOMP_VAE_HPP_
