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

// Command-line front end: one subcommand per pipeline stage.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "vaecomp/pipeline.hpp"
#include "vaecomp/weights_io.hpp"

namespace {

using namespace vaecomp;
namespace fs = std::filesystem;

struct Flags {
  std::string kind = "fnn";
  std::size_t chunk_size = 2048;
  std::size_t latent = 64;
  std::size_t epochs = 500;
  std::uint64_t seed = 1;
  std::string mnist_dir = "data/mnist";
  std::string out = "runs/default";
  std::string config;
  std::size_t patience = 25;
  std::size_t batch = 64;
  float lr = 1e-3f;
  double recon_sigma = 0.01;
  double noise_std = 0.01;
  double noise_fraction = 0.3;
  std::size_t n_train = 80;
  std::size_t n_val = 20;
  std::size_t base_epochs = 10;
  std::vector<std::size_t> latent_sizes;
  std::string weights;
};

struct Options {
  CLI::Option* kind = nullptr;
  CLI::Option* chunk_size = nullptr;
  CLI::Option* latent = nullptr;
  CLI::Option* epochs = nullptr;
  CLI::Option* seed = nullptr;
  CLI::Option* mnist_dir = nullptr;
  CLI::Option* out = nullptr;
  CLI::Option* patience = nullptr;
  CLI::Option* batch = nullptr;
  CLI::Option* lr = nullptr;
  CLI::Option* recon_sigma = nullptr;
  CLI::Option* noise_std = nullptr;
  CLI::Option* noise_fraction = nullptr;
  CLI::Option* n_train = nullptr;
  CLI::Option* n_val = nullptr;
  CLI::Option* base_epochs = nullptr;
  CLI::Option* latent_sizes = nullptr;
};

std::vector<ModelKind> parse_kinds(const std::string& text) {
  if (text == "all") return base_kinds();
  std::vector<ModelKind> kinds;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ',');) {
    const ModelKind k = parse_kind(part);
    if (k == ModelKind::kVae) throw std::invalid_argument("'vae' is not a base model kind");
    kinds.push_back(k);
  }
  if (kinds.empty()) throw std::invalid_argument("no model kind given");
  return kinds;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Defaults, then the config file, then every flag given on the command line.
RunConfig resolve(const Flags& f, const Options& o) {
  RunConfig c;
  c.mnist_dir = f.mnist_dir;
  c.out_dir = f.out;
  c.apply_seed(f.seed);
  if (!f.config.empty()) {
    try {
      c = run_config_from_json(read_text(f.config), c);
    } catch (const std::exception& e) {
      throw std::runtime_error("config '" + f.config + "': " + e.what());
    }
  }
  auto given = [](const CLI::Option* opt) { return opt && opt->count() > 0; };
  if (given(o.kind) || f.config.empty()) c.kinds = parse_kinds(f.kind);
  if (given(o.seed)) c.apply_seed(f.seed);
  if (given(o.chunk_size)) c.chunk_size = f.chunk_size;
  if (given(o.latent)) c.latent_dim = f.latent;
  if (given(o.epochs)) c.vae.max_epochs = f.epochs;
  if (given(o.mnist_dir)) c.mnist_dir = f.mnist_dir;
  if (given(o.out)) c.out_dir = f.out;
  if (given(o.patience)) c.vae.patience = f.patience;
  if (given(o.batch)) c.vae.batch_size = f.batch;
  if (given(o.lr)) c.vae.learning_rate = f.lr;
  if (given(o.recon_sigma)) c.vae.recon_sigma = f.recon_sigma;
  if (given(o.noise_std)) c.augment.noise_stddev = f.noise_std;
  if (given(o.noise_fraction)) c.augment.position_fraction = f.noise_fraction;
  if (given(o.n_train)) c.augment.n_train = f.n_train;
  if (given(o.n_val)) c.augment.n_val = f.n_val;
  if (given(o.base_epochs)) c.base.max_epochs = f.base_epochs;
  if (given(o.latent_sizes)) c.sweep_sizes = f.latent_sizes;
  if (c.chunk_size == 0) throw std::invalid_argument("--chunk-size must be positive");
  if (c.latent_dim == 0) throw std::invalid_argument("--latent must be positive");
  return c;
}

Options add_common(CLI::App* cmd, Flags& f) {
  Options o;
  o.kind = cmd->add_option("--kind", f.kind, "fnn, cnn, rnn, lstm, all or a comma list");
  o.chunk_size = cmd->add_option("--chunk-size", f.chunk_size, "Chunk length (default 2048)");
  o.latent = cmd->add_option("--latent", f.latent, "Latent size (default 64)");
  o.epochs = cmd->add_option("--epochs", f.epochs, "VAE epoch cap (default 500)");
  o.seed = cmd->add_option("--seed", f.seed, "Master seed");
  o.mnist_dir = cmd->add_option("--mnist-dir", f.mnist_dir, "Directory with the MNIST IDX files");
  o.out = cmd->add_option("--out", f.out, "Run directory");
  cmd->add_option("--config", f.config, "JSON config file; flags override it");
  o.patience = cmd->add_option("--patience", f.patience, "VAE early-stopping patience");
  o.batch = cmd->add_option("--batch", f.batch, "VAE batch size");
  o.lr = cmd->add_option("--lr", f.lr, "VAE learning rate");
  o.recon_sigma = cmd->add_option("--recon-sigma", f.recon_sigma,
                                  "Decoder output standard deviation");
  o.noise_std = cmd->add_option("--noise-std", f.noise_std, "Variant noise standard deviation");
  o.noise_fraction = cmd->add_option("--noise-fraction", f.noise_fraction,
                                     "Fraction of positions perturbed per variant");
  o.n_train = cmd->add_option("--n-train", f.n_train, "Training variants");
  o.n_val = cmd->add_option("--n-val", f.n_val, "Validation variants");
  o.base_epochs = cmd->add_option("--base-epochs", f.base_epochs, "Base-model epoch cap");
  return o;
}

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * v << '%';
  return os.str();
}

fs::path weights_source(const Flags& f, const RunConfig& c, ModelKind kind) {
  return f.weights.empty() ? base_weights_path(c.out_dir, kind) : fs::path(f.weights);
}

ParamSet load_original(const Flags& f, const RunConfig& c, ModelKind kind) {
  if (f.weights.empty()) return load_base_params(c.out_dir, kind);
  const fs::path path = f.weights;
  if (!fs::exists(path)) throw std::runtime_error("missing weights file '" + path.string() + "'");
  WeightFile w = load_weights(path);
  check_params(model_spec(kind), w.params);
  return std::move(w.params);
}

VaeParams load_vae(const RunConfig& c, ModelKind kind) {
  const fs::path path = vae_path(c.out_dir, kind);
  if (!fs::exists(path)) {
    throw std::runtime_error("missing VAE '" + path.string() + "' (run train-vae first)");
  }
  return VaeParams::from_weight_file(load_weights(path));
}

int run_command(const std::string& name, const Flags& f, const Options& o) {
  std::string stage = name;
  try {
    const RunConfig c = resolve(f, o);
    if (c.kinds.empty()) throw std::invalid_argument("no model kind given");
    fs::create_directories(c.out_dir);
    write_run_config(c.out_dir, name, c);

    if (name == "train-base") {
      stage = "load-mnist";
      const MnistSplits mnist = load_mnist(c.mnist_dir);
      stage = name;
      for (ModelKind kind : c.kinds) {
        const BaseRunResult r = run_train_base(kind, mnist, c, &std::cout);
        std::cout << kind_name(kind) << ": " << r.parameters << " parameters, test accuracy "
                  << pct(r.test_accuracy) << " -> " << base_weights_path(c.out_dir, kind)
                  << '\n';
      }
    } else if (name == "gen-data") {
      for (ModelKind kind : c.kinds) {
        stage = "load-base";
        const ParamSet original = load_original(f, c, kind);
        stage = name;
        const VariantSet v = run_gen_data(original, c);
        save_variants(variants_path(c.out_dir, kind), kind, v);
        std::cout << kind_name(kind) << ": " << split_check(v.train.size(), v.val.size()).message
                  << " -> " << variants_path(c.out_dir, kind) << '\n';
      }
    } else if (name == "train-vae") {
      for (ModelKind kind : c.kinds) {
        const fs::path vpath = variants_path(c.out_dir, kind);
        if (!fs::exists(vpath)) {
          throw std::runtime_error("missing variants '" + vpath.string() +
                                   "' (run gen-data first)");
        }
        const VaeTrainResult r = run_train_vae(kind, load_variants(vpath), c, &std::cout);
        save_weights(vae_path(c.out_dir, kind), r.best.to_weight_file());
        write_vae_curve_csv(vae_curve_path(c.out_dir, kind), r);
        std::cout << kind_name(kind) << ": best epoch " << r.best_epoch << " of "
                  << r.curve.size() << ", val loss " << r.best_val_loss << " -> "
                  << vae_path(c.out_dir, kind) << '\n';
      }
    } else if (name == "compress") {
      for (ModelKind kind : c.kinds) {
        stage = "load-base";
        const ParamSet original = load_original(f, c, kind);
        const VaeParams vae = load_vae(c, kind);
        stage = name;
        const LatentArchive a = compress(original, vae);
        save_archive(archive_path(c.out_dir, kind), a);
        std::cout << kind_name(kind) << ": " << a.n_chunks << " chunks x " << a.latent_dim
                  << " latents, rate " << compression_rate(a) << "x -> "
                  << archive_path(c.out_dir, kind) << '\n';
      }
    } else if (name == "decompress") {
      for (ModelKind kind : c.kinds) {
        const fs::path apath = archive_path(c.out_dir, kind);
        if (!fs::exists(apath)) {
          throw std::runtime_error("missing archive '" + apath.string() +
                                   "' (run compress first)");
        }
        const LatentArchive a = load_archive(apath);
        const ParamSet rebuilt = decompress(a, load_vae(c, kind), model_spec(kind));
        save_weights(reconstructed_path(c.out_dir, kind), {rebuilt, std::nullopt});
        std::cout << kind_name(kind) << ": " << rebuilt.parameter_count() << " parameters -> "
                  << reconstructed_path(c.out_dir, kind) << '\n';
      }
    } else if (name == "evaluate") {
      stage = "load-mnist";
      const MnistSplits mnist = load_mnist(c.mnist_dir);
      stage = name;
      std::vector<PipelineRow> rows;
      for (ModelKind kind : c.kinds) {
        const BaseModelSpec spec = model_spec(kind);
        const ParamSet original = load_original(f, c, kind);
        const EvalResult orig = evaluate(spec, original, mnist.test);
        PipelineRow row;
        row.kind = kind;
        row.params = original.parameter_count();
        row.acc_original = orig.accuracy;
        const fs::path rpath = reconstructed_path(c.out_dir, kind);
        std::cout << kind_name(kind) << ": original " << pct(orig.accuracy);
        if (fs::exists(rpath)) {
          WeightFile w = load_weights(rpath);
          check_params(spec, w.params);
          const EvalResult rec = evaluate(spec, w.params, mnist.test);
          row.acc_reconstructed = rec.accuracy;
          write_per_class_csv(c.out_dir / (std::string(kind_name(kind)) + "_per_class.csv"),
                              kind, orig, &rec);
          std::cout << ", reconstructed " << pct(rec.accuracy);
        } else {
          write_per_class_csv(c.out_dir / (std::string(kind_name(kind)) + "_per_class.csv"),
                              kind, orig, nullptr);
        }
        const fs::path apath = archive_path(c.out_dir, kind);
        if (fs::exists(apath)) {
          const LatentArchive a = load_archive(apath);
          row.chunks = a.n_chunks;
          row.latent_dim = a.latent_dim;
          row.rate = compression_rate(a);
        }
        std::cout << '\n';
        rows.push_back(row);
      }
      write_report_csv(c.out_dir / "evaluate.csv", rows);
    } else if (name == "pipeline") {
      stage = "load-mnist";
      const MnistSplits mnist = load_mnist(c.mnist_dir);
      stage = name;
      std::vector<PipelineRow> rows;
      for (ModelKind kind : c.kinds) {
        ParamSet original;
        if (fs::exists(weights_source(f, c, kind))) {
          original = load_original(f, c, kind);
          std::cout << "[pipeline] reusing " << weights_source(f, c, kind) << '\n';
        } else {
          original = run_train_base(kind, mnist, c, &std::cout).training.params;
        }
        rows.push_back(run_pipeline_kind(kind, original, mnist.test, c, &std::cout).row);
        write_report_csv(c.out_dir / "report.csv", rows);
      }
      std::cout << "report -> " << c.out_dir / "report.csv" << '\n';
    } else if (name == "sweep") {
      if (c.sweep_sizes.empty()) throw std::invalid_argument("--latent-sizes is empty");
      stage = "load-mnist";
      const MnistSplits mnist = load_mnist(c.mnist_dir);
      stage = name;
      for (ModelKind kind : c.kinds) {
        const ParamSet original = load_original(f, c, kind);
        const SweepOutcome s =
            run_sweep(kind, original, mnist.test, c.sweep_sizes, c, &std::cout);
        const fs::path path =
            c.out_dir / (c.kinds.size() == 1 ? std::string("sweep.csv")
                                             : std::string(kind_name(kind)) + "_sweep.csv");
        write_sweep_csv(path, s);
        std::cout << kind_name(kind) << ": sweep -> " << path << '\n';
      }
    } else if (name == "curves") {
      const fs::path path = c.out_dir / "curves.csv";
      const std::size_t n = write_curves_csv(c.out_dir, path);
      std::cout << n << " rows -> " << path << '\n';
    }
    return 0;
  } catch (const StageError& e) {
    std::cerr << "error [" << e.stage() << "] " << (e.what() + e.stage().size() + 2) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error [" << stage << "] " << e.what() << '\n';
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compress trained MNIST classifiers into VAE latent codes"};
  app.require_subcommand(1);
  Flags flags;
  std::vector<std::pair<CLI::App*, Options>> commands;
  const std::vector<std::pair<std::string, std::string>> names = {
      {"train-base", "Train base classifiers and save NNWT weights"},
      {"gen-data", "Generate noisy parameter variants"},
      {"train-vae", "Train the chunk VAE on the variants"},
      {"compress", "Encode base weights into a VAEC archive"},
      {"decompress", "Rebuild weights from a VAEC archive"},
      {"evaluate", "Test accuracy of original and reconstructed weights"},
      {"pipeline", "Run every stage and write report.csv"},
      {"sweep", "Compare accuracy across latent sizes"},
      {"curves", "Collect VAE loss curves into curves.csv"}};
  for (const auto& [name, help] : names) {
    CLI::App* cmd = app.add_subcommand(name, help);
    Options o = add_common(cmd, flags);
    if (name == "gen-data" || name == "compress" || name == "evaluate" ||
        name == "pipeline" || name == "sweep") {
      cmd->add_option("--weights", flags.weights, "Base weights file (default <out>/<kind>.nnwt)");
    }
    if (name == "sweep") {
      o.latent_sizes = cmd->add_option("--latent-sizes", flags.latent_sizes,
                                       "Latent sizes, e.g. 128,96,64")
                           ->delimiter(',');
    }
    commands.emplace_back(cmd, o);
  }
  CLI11_PARSE(app, argc, argv);
  for (const auto& [cmd, o] : commands) {
    if (cmd->parsed()) return run_command(cmd->get_name(), flags, o);
  }
  return 1;
}
