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

#include "vaecomp/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "vaecomp/byte_io.hpp"
#include "vaecomp/param_codec.hpp"
#include "vaecomp/weights_io.hpp"

namespace vaecomp {

namespace fs = std::filesystem;
using nlohmann::json;

// ---- config ----------------------------------------------------------------

void RunConfig::apply_seed(std::uint64_t master) {
  seed = master;
  base.seed = master;
  augment.seed = master + 101;
  vae.seed = master + 202;
}

VaeArchitecture RunConfig::architecture() const {
  return {chunk_size, latent_dim, vae_hidden};
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  std::vector<std::string> kinds;
  for (ModelKind k : c.kinds) kinds.emplace_back(kind_name(k));
  j["kinds"] = kinds;
  j["mnist_dir"] = c.mnist_dir.string();
  j["out_dir"] = c.out_dir.string();
  j["seed"] = c.seed;
  j["chunk_size"] = c.chunk_size;
  j["latent_dim"] = c.latent_dim;
  j["sweep_sizes"] = c.sweep_sizes;
  j["vae_hidden"] = c.vae_hidden;
  j["augment"] = {{"n_train", c.augment.n_train},
                  {"n_val", c.augment.n_val},
                  {"position_fraction", c.augment.position_fraction},
                  {"noise_stddev", c.augment.noise_stddev},
                  {"seed", c.augment.seed}};
  j["vae"] = {{"max_epochs", c.vae.max_epochs},
              {"patience", c.vae.patience},
              {"batch_size", c.vae.batch_size},
              {"learning_rate", c.vae.learning_rate},
              {"recon_sigma", c.vae.recon_sigma},
              {"seed", c.vae.seed}};
  j["base"] = {{"max_epochs", c.base.max_epochs},
               {"batch_size", c.base.batch_size},
               {"learning_rate", c.base.learning_rate},
               {"validation_size", c.base.validation_size},
               {"patience", c.base.patience},
               {"clip_norm", c.base.clip_norm},
               {"seed", c.base.seed}};
  return j.dump(2);
}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig run_config_from_json(const std::string& text, RunConfig c) {
  const json j = json::parse(text);
  if (j.contains("kinds")) {
    c.kinds.clear();
    for (const auto& k : j.at("kinds")) c.kinds.push_back(parse_kind(k.get<std::string>()));
  }
  if (j.contains("mnist_dir")) c.mnist_dir = j.at("mnist_dir").get<std::string>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("seed")) c.apply_seed(j.at("seed").get<std::uint64_t>());
  read_if(j, "chunk_size", c.chunk_size);
  read_if(j, "latent_dim", c.latent_dim);
  read_if(j, "sweep_sizes", c.sweep_sizes);
  read_if(j, "vae_hidden", c.vae_hidden);
  if (j.contains("augment")) {
    const json& a = j.at("augment");
    read_if(a, "n_train", c.augment.n_train);
    read_if(a, "n_val", c.augment.n_val);
    read_if(a, "position_fraction", c.augment.position_fraction);
    read_if(a, "noise_stddev", c.augment.noise_stddev);
    read_if(a, "seed", c.augment.seed);
  }
  if (j.contains("vae")) {
    const json& v = j.at("vae");
    read_if(v, "max_epochs", c.vae.max_epochs);
    read_if(v, "patience", c.vae.patience);
    read_if(v, "batch_size", c.vae.batch_size);
    read_if(v, "learning_rate", c.vae.learning_rate);
    read_if(v, "recon_sigma", c.vae.recon_sigma);
    read_if(v, "seed", c.vae.seed);
  }
  if (j.contains("base")) {
    const json& b = j.at("base");
    read_if(b, "max_epochs", c.base.max_epochs);
    read_if(b, "batch_size", c.base.batch_size);
    read_if(b, "learning_rate", c.base.learning_rate);
    read_if(b, "validation_size", c.base.validation_size);
    read_if(b, "patience", c.base.patience);
    read_if(b, "clip_norm", c.base.clip_norm);
    read_if(b, "seed", c.base.seed);
  }
  return c;
}

void write_run_config(const fs::path& dir, const std::string& command,
                      const RunConfig& config) {
  const std::string text = run_config_to_json(config) + "\n";
  write_file(dir / ("run_config." + command + ".json"),
             std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---- paths -----------------------------------------------------------------

fs::path base_weights_path(const fs::path& dir, ModelKind kind) {
  return dir / (std::string(kind_name(kind)) + ".nnwt");
}
fs::path variants_path(const fs::path& dir, ModelKind kind) {
  return dir / (std::string(kind_name(kind)) + "_variants.nnwt");
}
fs::path vae_path(const fs::path& dir, ModelKind kind) {
  return dir / (std::string(kind_name(kind)) + "_vae.nnwt");
}
fs::path vae_curve_path(const fs::path& dir, ModelKind kind) {
  return dir / (std::string(kind_name(kind)) + "_vae_curve.csv");
}
fs::path archive_path(const fs::path& dir, ModelKind kind) {
  return dir / (std::string(kind_name(kind)) + ".vaec");
}
fs::path reconstructed_path(const fs::path& dir, ModelKind kind) {
  return dir / (std::string(kind_name(kind)) + "_reconstructed.nnwt");
}

namespace {

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(10);
  return out;
}

void note(std::ostream* log, const std::string& line) {
  if (log) *log << line << std::endl;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

ParamSet load_base_params(const fs::path& dir, ModelKind kind) {
  const fs::path path = base_weights_path(dir, kind);
  if (!fs::exists(path)) {
    throw StageError("load-base", "missing base weights '" + path.string() +
                                      "' (run train-base first)");
  }
  WeightFile f = load_weights(path);
  check_params(model_spec(kind), f.params);
  return std::move(f.params);
}

// ---- stages ----------------------------------------------------------------

BaseRunResult run_train_base(ModelKind kind, const MnistSplits& mnist,
                             const RunConfig& config, std::ostream* log) {
  BuiltModel built = build_model(kind, config.base.seed);
  note(log, "[train-base] " + std::string(kind_name(kind)) + ": " +
                std::to_string(built.params.parameter_count()) + " parameters");
  BaseRunResult r;
  r.kind = kind;
  r.parameters = built.params.parameter_count();
  try {
    r.training = train_base(
        built.spec, std::move(built.params), mnist.train, config.base,
        [&](const BaseEpochMetrics& m) {
          note(log, "[train-base] " + std::string(kind_name(kind)) + " epoch " +
                        std::to_string(m.epoch) + " loss " + fixed(m.train_loss, 4) +
                        " val_acc " + fixed(m.val_accuracy, 4) + " (" +
                        fixed(m.seconds, 1) + "s)");
        });
  } catch (const std::exception& e) {
    throw StageError("train-base", e.what());
  }
  r.test_accuracy = evaluate_accuracy(built.spec, r.training.params, mnist.test);
  save_weights(base_weights_path(config.out_dir, kind), {r.training.params, std::nullopt});
  write_base_metrics_csv(config.out_dir / (std::string(kind_name(kind)) + "_base_metrics.csv"),
                         r.training);
  note(log, "[train-base] " + std::string(kind_name(kind)) + " test accuracy " +
                fixed(r.test_accuracy, 4));
  return r;
}

VariantSet run_gen_data(const ParamSet& original, const RunConfig& config) {
  return generate_variants(flatten(original), config.augment);
}

void save_variants(const fs::path& path, ModelKind kind, const VariantSet& v) {
  ParamSet p(kind);
  const Tensor* first = !v.train.empty() ? &v.train.front()
                                         : (!v.val.empty() ? &v.val.front() : nullptr);
  const std::size_t n = first ? first->size() : 0;
  auto stack = [n](const std::vector<Tensor>& items) {
    Tensor t({items.size(), n});
    for (std::size_t i = 0; i < items.size(); ++i) {
      std::copy(items[i].data(), items[i].data() + n, t.data() + i * n);
    }
    return t;
  };
  p.add("train", stack(v.train));
  p.add("val", stack(v.val));
  save_weights(path, {std::move(p), std::nullopt});
}

VariantSet load_variants(const fs::path& path) {
  const WeightFile f = load_weights(path);
  const auto ti = f.params.find("train");
  const auto vi = f.params.find("val");
  if (!ti || !vi) throw std::runtime_error(path.string() + ": not a variants file");
  VariantSet v;
  for (auto [idx, dst] : {std::pair{*ti, &v.train}, std::pair{*vi, &v.val}}) {
    const Tensor& t = f.params[idx];
    for (std::size_t i = 0; i < t.dim(0); ++i) {
      auto row = t.row(i);
      dst->emplace_back(Shape{row.size()}, FloatBuffer(row.begin(), row.end()));
    }
  }
  return v;
}

ChunkPool pool_chunks(const VariantSet& variants, std::size_t chunk_size) {
  auto pool = [chunk_size](const std::vector<Tensor>& items) {
    std::vector<Tensor> parts;
    parts.reserve(items.size());
    for (const Tensor& v : items) parts.push_back(chunk(v, chunk_size).chunks);
    if (parts.empty()) return Tensor({0, chunk_size});
    return concat_rows(parts);
  };
  return {pool(variants.train), pool(variants.val)};
}

VaeTrainResult run_train_vae(ModelKind kind, const VariantSet& variants,
                             const RunConfig& config, std::ostream* log) {
  const ChunkPool pool = pool_chunks(variants, config.chunk_size);
  const std::string name(kind_name(kind));
  note(log, "[train-vae] " + name + ": " + std::to_string(pool.train.dim(0)) +
                " train chunks, " + std::to_string(pool.val.dim(0)) +
                " val chunks, latent " + std::to_string(config.latent_dim));
  try {
    return train_vae(pool.train, pool.val, config.architecture(), config.vae,
                     [&](const VaeEpochRecord& r) {
                       if (r.epoch % 10 == 0 || r.epoch == 1) {
                         note(log, "[train-vae] " + name + " epoch " +
                                       std::to_string(r.epoch) + " train " +
                                       fixed(r.train_loss, 2) + " val " +
                                       fixed(r.val_loss, 2) + " (kl " +
                                       fixed(r.val_kl, 2) + ", " +
                                       fixed(r.seconds, 2) + "s)");
                       }
                     });
  } catch (const std::exception& e) {
    throw StageError("train-vae", e.what());
  }
}

PipelineOutcome run_pipeline_kind(ModelKind kind, const ParamSet& original,
                                  const MnistDataset& test, const RunConfig& config,
                                  std::ostream* log) {
  const BaseModelSpec spec = model_spec(kind);
  const fs::path& dir = config.out_dir;
  const std::string name(kind_name(kind));
  PipelineOutcome out;

  VariantSet variants;
  try {
    check_params(spec, original);
    variants = run_gen_data(original, config);
    save_variants(variants_path(dir, kind), kind, variants);
  } catch (const std::exception& e) {
    throw StageError("gen-data", e.what());
  }
  const SplitReport split = split_check(variants.train.size(), variants.val.size());
  note(log, "[gen-data] " + name + ": " + split.message);

  out.vae = run_train_vae(kind, variants, config, log);
  variants = {};
  const VaeParams& vae = out.vae.best;
  save_weights(vae_path(dir, kind), vae.to_weight_file());
  write_vae_curve_csv(vae_curve_path(dir, kind), out.vae);

  try {
    out.archive = compress(original, vae);
    save_archive(archive_path(dir, kind), out.archive);
  } catch (const std::exception& e) {
    throw StageError("compress", e.what());
  }
  try {
    out.reconstructed = decompress(load_archive(archive_path(dir, kind)), vae, spec);
    save_weights(reconstructed_path(dir, kind), {out.reconstructed, std::nullopt});
  } catch (const std::exception& e) {
    throw StageError("decompress", e.what());
  }
  try {
    out.original_eval = evaluate(spec, original, test);
    out.reconstructed_eval = evaluate(spec, out.reconstructed, test);
  } catch (const std::exception& e) {
    throw StageError("evaluate", e.what());
  }
  write_per_class_csv(dir / (name + "_per_class.csv"), kind, out.original_eval,
                      &out.reconstructed_eval);

  PipelineRow& row = out.row;
  row.kind = kind;
  row.params = out.archive.parameter_count();
  row.chunks = out.archive.n_chunks;
  row.latent_dim = out.archive.latent_dim;
  row.rate = compression_rate(out.archive);
  row.rate_with_decoder = compression_rate_with_decoder(out.archive, vae);
  row.acc_original = out.original_eval.accuracy;
  row.acc_reconstructed = out.reconstructed_eval.accuracy;
  row.vae_epochs = out.vae.curve.size();
  row.vae_best_epoch = out.vae.best_epoch;
  row.vae_best_val_loss = out.vae.best_val_loss;
  row.vae_train_seconds = out.vae.seconds;
  note(log, "[pipeline] " + name + ": rate " + fixed(row.rate, 2) + "x, accuracy " +
                fixed(row.acc_original, 4) + " -> " + fixed(row.acc_reconstructed, 4) +
                " after " + std::to_string(row.vae_epochs) + " VAE epochs");
  return out;
}

// ---- reports ---------------------------------------------------------------

void write_report_csv(const fs::path& path, const std::vector<PipelineRow>& rows) {
  std::ofstream out = open_csv(path);
  out << "kind,params,chunks,latent_dim,rate,acc_original,acc_reconstructed,"
         "vae_epochs,vae_train_seconds,rate_with_decoder,vae_best_epoch,"
         "vae_best_val_loss\n";
  for (const PipelineRow& r : rows) {
    out << kind_name(r.kind) << ',' << r.params << ',' << r.chunks << ','
        << r.latent_dim << ',' << r.rate << ',' << r.acc_original << ','
        << r.acc_reconstructed << ',' << r.vae_epochs << ',' << r.vae_train_seconds
        << ',' << r.rate_with_decoder << ',' << r.vae_best_epoch << ','
        << r.vae_best_val_loss << '\n';
  }
}

void write_vae_curve_csv(const fs::path& path, const VaeTrainResult& result) {
  std::ofstream out = open_csv(path);
  out << "epoch,train_loss,train_reconstruction,train_kl,val_loss,"
         "val_reconstruction,val_kl,seconds\n";
  for (const VaeEpochRecord& r : result.curve) {
    out << r.epoch << ',' << r.train_loss << ',' << r.train_reconstruction << ','
        << r.train_kl << ',' << r.val_loss << ',' << r.val_reconstruction << ','
        << r.val_kl << ',' << r.seconds << '\n';
  }
}

void write_base_metrics_csv(const fs::path& path, const BaseTrainResult& result) {
  std::ofstream out = open_csv(path);
  out << "epoch,train_loss,val_loss,val_accuracy,seconds\n";
  for (const BaseEpochMetrics& m : result.history) {
    out << m.epoch << ',' << m.train_loss << ',' << m.val_loss << ','
        << m.val_accuracy << ',' << m.seconds << '\n';
  }
}

void write_per_class_csv(const fs::path& path, ModelKind kind,
                         const EvalResult& original, const EvalResult* reconstructed) {
  std::ofstream out = open_csv(path);
  out << "kind,digit,count,correct_original,acc_original";
  if (reconstructed) out << ",correct_reconstructed,acc_reconstructed";
  out << '\n';
  for (std::size_t d = 0; d < original.class_total.size(); ++d) {
    const double total = static_cast<double>(original.class_total[d]);
    auto acc = [total](std::size_t c) { return total > 0 ? c / total : 0.0; };
    out << kind_name(kind) << ',' << d << ',' << original.class_total[d] << ','
        << original.class_correct[d] << ',' << acc(original.class_correct[d]);
    if (reconstructed) {
      out << ',' << reconstructed->class_correct[d] << ','
          << acc(reconstructed->class_correct[d]);
    }
    out << '\n';
  }
}

SweepOutcome run_sweep(ModelKind kind, const ParamSet& original,
                       const MnistDataset& test, const std::vector<std::size_t>& sizes,
                       const RunConfig& config, std::ostream* log) {
  if (sizes.empty()) throw StageError("sweep", "no latent sizes given");
  const BaseModelSpec spec = model_spec(kind);
  check_params(spec, original);
  SweepOutcome s;
  s.kind = kind;
  s.acc_original = evaluate_accuracy(spec, original, test);
  const VariantSet variants = run_gen_data(original, config);
  const ChunkPool pool = pool_chunks(variants, config.chunk_size);
  const std::string name(kind_name(kind));
  try {
    s.rows = latent_sweep(
        pool.train, pool.val, sizes, config.architecture(), config.vae,
        [&](const VaeParams& vae) {
          const ParamSet rebuilt = decompress(compress(original, vae), vae, spec);
          const double acc = evaluate_accuracy(spec, rebuilt, test);
          note(log, "[sweep] " + name + " latent " +
                        std::to_string(vae.architecture().latent_dim) + ": accuracy " +
                        fixed(acc, 4));
          return acc;
        });
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("sweep", e.what());
  }
  for (const SweepRow& r : s.rows) {
    s.rates.push_back(expected_compression_rate(original.parameter_count(),
                                                config.chunk_size, r.latent_dim));
  }
  return s;
}

void write_sweep_csv(const fs::path& path, const SweepOutcome& s) {
  std::ofstream out = open_csv(path);
  out << "kind,latent_dim,rate,acc_original,acc_reconstructed,vae_epochs,"
         "vae_best_epoch,vae_best_val_loss,vae_train_seconds\n";
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const SweepRow& r = s.rows[i];
    out << kind_name(s.kind) << ',' << r.latent_dim << ',' << s.rates[i] << ','
        << s.acc_original << ',' << r.accuracy << ',' << r.epochs << ','
        << r.best_epoch << ',' << r.best_val_loss << ',' << r.seconds << '\n';
  }
}

std::size_t epochs_to_reach(const std::vector<VaeEpochRecord>& curve, double factor) {
  if (curve.empty()) return 0;
  const double target = factor * curve.back().train_loss;
  for (const VaeEpochRecord& r : curve) {
    if (r.train_loss <= target) return r.epoch;
  }
  return curve.back().epoch;
}

std::size_t write_curves_csv(const fs::path& run_dir, const fs::path& out_path) {
  if (!fs::is_directory(run_dir)) {
    throw StageError("curves", "run directory '" + run_dir.string() + "' does not exist");
  }
  struct Row {
    std::string epoch, train, val;
  };
  std::ofstream out;
  std::size_t rows = 0;
  bool any = false;
  for (ModelKind kind : base_kinds()) {
    const fs::path path = vae_curve_path(run_dir, kind);
    if (!fs::exists(path)) continue;
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<Row> parsed;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      if (cells.size() < 5) throw StageError("curves", "malformed row in " + path.string());
      const double val = std::stod(cells[4]);
      if (val < best) {
        best = val;
        best_index = parsed.size();
      }
      parsed.push_back({cells[0], cells[1], cells[4]});
    }
    if (!any) {
      out = open_csv(out_path);
      out << "kind,epoch,train_loss,val_loss,best\n";
      any = true;
    }
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      out << kind_name(kind) << ',' << parsed[i].epoch << ',' << parsed[i].train << ','
          << parsed[i].val << ',' << (i == best_index ? 1 : 0) << '\n';
      ++rows;
    }
  }
  if (!any) {
    throw StageError("curves", "no *_vae_curve.csv files in '" + run_dir.string() +
                                   "' (run pipeline first)");
  }
  return rows;
}

}  // namespace vaecomp
