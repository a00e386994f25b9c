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

// End-to-end stages shared by the command-line tool and the acceptance suite:
// base-model training, variant generation, VAE training, compression,
// reconstruction, evaluation and the CSV reports.
//
// Files in a run directory:
//   <kind>.nnwt                 trained base weights
//   <kind>_base_metrics.csv     base training history
//   <kind>_variants.nnwt        noise variants (blocks "train", "val")
//   <kind>_vae.nnwt             trained VAE
//   <kind>_vae_curve.csv        VAE loss per epoch
//   <kind>.vaec                 latent archive
//   <kind>_reconstructed.nnwt   decoder-rebuilt weights
//   <kind>_per_class.csv        per-digit accuracy, original vs reconstructed
//   report.csv, sweep.csv, curves.csv
//   run_config.<command>.json   configuration that produced the outputs

#ifndef VAECOMP_PIPELINE_HPP_
#define VAECOMP_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vaecomp/augment.hpp"
#include "vaecomp/base_models.hpp"
#include "vaecomp/compressor.hpp"
#include "vaecomp/mnist.hpp"
#include "vaecomp/vae.hpp"

namespace vaecomp {

struct RunConfig {
  std::vector<ModelKind> kinds = {ModelKind::kFnn};
  std::filesystem::path mnist_dir = "data/mnist";
  std::filesystem::path out_dir = "runs/default";
  std::uint64_t seed = 1;
  std::size_t chunk_size = 2048;
  std::size_t latent_dim = 64;
  std::vector<std::size_t> sweep_sizes = {128, 96, 64};
  std::vector<std::size_t> vae_hidden = {512, 256};
  AugmentConfig augment;
  VaeTrainConfig vae;
  BaseTrainConfig base;

  // Gives every stage its own seed derived from `seed`.
  void apply_seed(std::uint64_t master);
  VaeArchitecture architecture() const;
};

std::string run_config_to_json(const RunConfig& config);
// Starts from `defaults` and overrides every key present in the JSON text.
RunConfig run_config_from_json(const std::string& json, RunConfig defaults = {});
void write_run_config(const std::filesystem::path& dir, const std::string& command,
                      const RunConfig& config);

std::filesystem::path base_weights_path(const std::filesystem::path& dir, ModelKind kind);
std::filesystem::path variants_path(const std::filesystem::path& dir, ModelKind kind);
std::filesystem::path vae_path(const std::filesystem::path& dir, ModelKind kind);
std::filesystem::path vae_curve_path(const std::filesystem::path& dir, ModelKind kind);
std::filesystem::path archive_path(const std::filesystem::path& dir, ModelKind kind);
std::filesystem::path reconstructed_path(const std::filesystem::path& dir, ModelKind kind);

// Error raised by a pipeline stage; the message starts with the stage name.
class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct BaseRunResult {
  ModelKind kind = ModelKind::kFnn;
  std::size_t parameters = 0;
  double test_accuracy = 0.0;
  BaseTrainResult training;
};

// Builds, trains and saves one base model; evaluates it on the test split.
BaseRunResult run_train_base(ModelKind kind, const MnistSplits& mnist,
                             const RunConfig& config, std::ostream* log);

// Flattened variants of `original`, written to <kind>_variants.nnwt.
VariantSet run_gen_data(const ParamSet& original, const RunConfig& config);
void save_variants(const std::filesystem::path& path, ModelKind kind,
                   const VariantSet& variants);
VariantSet load_variants(const std::filesystem::path& path);

struct ChunkPool {
  Tensor train;  // [n_train_variants * n_chunks, chunk_size]
  Tensor val;
};

// Chunks each variant and pools all chunks as individual rows.
ChunkPool pool_chunks(const VariantSet& variants, std::size_t chunk_size);

VaeTrainResult run_train_vae(ModelKind kind, const VariantSet& variants,
                             const RunConfig& config, std::ostream* log);

struct PipelineRow {
  ModelKind kind = ModelKind::kFnn;
  std::size_t params = 0;
  std::size_t chunks = 0;
  std::size_t latent_dim = 0;
  double rate = 0.0;
  double rate_with_decoder = 0.0;
  double acc_original = 0.0;
  double acc_reconstructed = 0.0;
  std::size_t vae_epochs = 0;
  std::size_t vae_best_epoch = 0;
  double vae_best_val_loss = 0.0;
  double vae_train_seconds = 0.0;
};

struct PipelineOutcome {
  PipelineRow row;
  LatentArchive archive;
  ParamSet reconstructed;
  VaeTrainResult vae;
  EvalResult original_eval;
  EvalResult reconstructed_eval;
};

// augment -> train VAE -> compress -> decompress -> evaluate, for a trained
// base model. Writes every per-kind artifact into config.out_dir.
PipelineOutcome run_pipeline_kind(ModelKind kind, const ParamSet& original,
                                  const MnistDataset& test, const RunConfig& config,
                                  std::ostream* log);

void write_report_csv(const std::filesystem::path& path,
                      const std::vector<PipelineRow>& rows);
void write_vae_curve_csv(const std::filesystem::path& path,
                         const VaeTrainResult& result);
void write_base_metrics_csv(const std::filesystem::path& path,
                            const BaseTrainResult& result);
void write_per_class_csv(const std::filesystem::path& path, ModelKind kind,
                         const EvalResult& original, const EvalResult* reconstructed);

struct SweepOutcome {
  ModelKind kind = ModelKind::kFnn;
  double acc_original = 0.0;
  std::vector<SweepRow> rows;
  std::vector<double> rates;
};

SweepOutcome run_sweep(ModelKind kind, const ParamSet& original,
                       const MnistDataset& test, const std::vector<std::size_t>& sizes,
                       const RunConfig& config, std::ostream* log);
void write_sweep_csv(const std::filesystem::path& path, const SweepOutcome& sweep);

// Gathers every <kind>_vae_curve.csv in `run_dir` into one long-format
// table (kind, epoch, train_loss, val_loss, best). Returns the row count.
std::size_t write_curves_csv(const std::filesystem::path& run_dir,
                             const std::filesystem::path& out_path);

// Epoch at which a loss curve first drops to `factor` times its final value.
std::size_t epochs_to_reach(const std::vector<VaeEpochRecord>& curve, double factor);

ParamSet load_base_params(const std::filesystem::path& dir, ModelKind kind);

}  // namespace vaecomp

#endif  // VAECOMP_PIPELINE_HPP_
