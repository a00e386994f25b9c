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

// End-to-end acceptance run: trains the four base models on MNIST, compresses
// each through a latent-64 VAE and checks every acceptance criterion. Prints
// one PASS/FAIL line per criterion and exits nonzero if any fails.
//
//   vaecomp_acceptance --mnist-dir DIR --work-dir DIR [--reuse-base]
//
// --reuse-base keeps trained base weights found in the work directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gradient_cases.hpp"
#include "test_support.hpp"
#include "vaecomp/byte_io.hpp"
#include "vaecomp/pipeline.hpp"
#include "vaecomp/weights_io.hpp"

namespace {

using namespace vaecomp;
namespace fs = std::filesystem;

struct Expectation {
  ModelKind kind;
  std::size_t params;
  std::size_t chunks;
  double rate;          // n / (chunks * 64), computed independently
  double rounded_rate;  // two-decimal reference value
  double min_accuracy;
};

const Expectation kExpected[] = {
    {ModelKind::kFnn, 185300, 91, 31.8166208791, 31.82, 0.96},
    {ModelKind::kCnn, 122270, 60, 31.8411458333, 31.84, 0.96},
    {ModelKind::kRnn, 54538, 27, 31.5613425926, 31.56, 0.87},
    {ModelKind::kLstm, 214282, 105, 31.8872023810, 31.89, 0.96},
};

constexpr double kRetention = 0.02;
constexpr std::size_t kSweepKindIndex = 2;  // RNN

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

class Report {
 public:
  explicit Report(const fs::path& file) : file_(file) {}

  void record(int id, const std::string& title, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << o.detail
         << " (" << fmt(secs, 1) << "s)";
    std::cout << line.str() << std::endl;
    lines_.push_back(line.str());
    failures_ += o.pass ? 0 : 1;
  }

  void note(const std::string& text) {
    std::cout << "INFO " << text << std::endl;
    lines_.push_back("INFO " + text);
  }

  int finish() {
    std::ofstream out(file_);
    for (const auto& l : lines_) out << l << '\n';
    const std::string summary = failures_ == 0
                                    ? "acceptance: all criteria passed"
                                    : "acceptance: " + std::to_string(failures_) + " criteria failed";
    out << summary << '\n';
    std::cout << summary << std::endl;
    return failures_ == 0 ? 0 : 1;
  }

 private:
  fs::path file_;
  std::vector<std::string> lines_;
  int failures_ = 0;
};

RunConfig base_config(const fs::path& mnist_dir, const fs::path& out) {
  RunConfig c;
  c.mnist_dir = mnist_dir;
  c.out_dir = out;
  c.apply_seed(1);
  c.chunk_size = 2048;
  c.latent_dim = 64;
  c.vae.max_epochs = 500;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path mnist_dir = "data/mnist";
  fs::path work = "acceptance_run";
  bool reuse_base = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--mnist-dir" && i + 1 < argc) {
      mnist_dir = argv[++i];
    } else if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--reuse-base") {
      reuse_base = true;
    } else {
      std::cerr << "usage: vaecomp_acceptance --mnist-dir DIR --work-dir DIR [--reuse-base]\n";
      return 2;
    }
  }
  const fs::path run_dir = work / "run";
  const fs::path rerun_dir = work / "rerun";
  const fs::path sweep_dir = work / "sweep128";
  if (!reuse_base) fs::remove_all(run_dir);
  fs::remove_all(rerun_dir);
  fs::remove_all(sweep_dir);
  fs::create_directories(run_dir);
  Report report(work / "acceptance_report.txt");
  const RunConfig cfg = base_config(mnist_dir, run_dir);
  std::ostream* log = &std::clog;

  report.record(1, "parameter counts", [] {
    Outcome o{true, ""};
    for (const auto& e : kExpected) {
      const std::size_t n = build_model(e.kind, 1).params.parameter_count();
      o.pass = o.pass && n == e.params && reference_parameter_count(e.kind) == e.params;
      o.detail += std::string(kind_name(e.kind)) + "=" + std::to_string(n) + " ";
    }
    return o;
  });

  report.record(4, "gradient checks (10 seeds, rel err < 1e-3)", [] {
    Outcome o{true, ""};
    for (const auto& c : testing::run_gradient_cases()) {
      o.pass = o.pass && c.worst < testing::kGradientTolerance;
      o.detail += c.name + "=" + [&] {
        std::ostringstream os;
        os << std::scientific << std::setprecision(1) << c.worst;
        return os.str();
      }() + " ";
    }
    return o;
  });

  report.record(5, "KL closed form vs 1e5-sample Monte Carlo (20 draws, 3 SE)", [] {
    Outcome o{true, ""};
    double worst = 0.0;
    for (std::uint64_t d = 0; d < 20; ++d) {
      const Tensor mu = testing::random_tensor({8}, 7000 + d, 2.0f);
      const Tensor lv = testing::random_tensor({8}, 8000 + d, 2.0f);
      const auto mc = testing::kl_monte_carlo(mu, lv, 100000, 9000 + d);
      const double z = std::abs(kl_divergence(mu, lv) - mc.mean) / mc.standard_error;
      worst = std::max(worst, z);
      o.pass = o.pass && z <= 3.0;
    }
    o.detail = "worst |closed - mc| = " + fmt(worst, 2) + " SE";
    return o;
  });

  // Base models.
  std::map<ModelKind, ParamSet> base;
  std::map<ModelKind, double> base_acc;
  MnistSplits mnist;
  bool have_mnist = false;
  try {
    mnist = load_mnist(mnist_dir);
    have_mnist = true;
  } catch (const std::exception& e) {
    report.note(std::string("cannot load MNIST: ") + e.what());
  }
  if (have_mnist) {
    for (const auto& e : kExpected) {
      try {
        if (reuse_base && fs::exists(base_weights_path(run_dir, e.kind))) {
          base[e.kind] = load_base_params(run_dir, e.kind);
          base_acc[e.kind] = evaluate_accuracy(model_spec(e.kind), base[e.kind], mnist.test);
        } else {
          BaseRunResult r = run_train_base(e.kind, mnist, cfg, log);
          base[e.kind] = std::move(r.training.params);
          base_acc[e.kind] = r.test_accuracy;
        }
      } catch (const std::exception& ex) {
        report.note(std::string(kind_name(e.kind)) + " base training failed: " + ex.what());
      }
    }
  }

  report.record(3, "codec identity (4 trained + 100 random parameter sets)", [&] {
    Outcome o{base.size() == 4, ""};
    for (const auto& [kind, params] : base) {
      o.pass = o.pass && testing::codec_identity(params, 2048);
    }
    std::size_t ok = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      ok += testing::codec_identity(testing::random_param_set(1000 + s), 1 + s % 2048);
    }
    o.pass = o.pass && ok == 100;
    o.detail = std::to_string(base.size()) + "/4 trained bit-exact, " + std::to_string(ok) +
               "/100 random bit-exact";
    return o;
  });

  report.record(6, "base test accuracy (FNN/CNN/LSTM >= 96%, RNN >= 87%)", [&] {
    Outcome o{base_acc.size() == 4, ""};
    for (const auto& e : kExpected) {
      if (!base_acc.count(e.kind)) continue;
      o.pass = o.pass && base_acc[e.kind] >= e.min_accuracy;
      o.detail += std::string(kind_name(e.kind)) + "=" + fmt(100 * base_acc[e.kind], 2) + "% ";
    }
    return o;
  });

  // Compression pipeline at latent 64 for every kind.
  std::map<ModelKind, PipelineOutcome> runs;
  std::vector<PipelineRow> rows;
  for (const auto& e : kExpected) {
    if (!base.count(e.kind)) continue;
    try {
      runs[e.kind] = run_pipeline_kind(e.kind, base[e.kind], mnist.test, cfg, log);
      rows.push_back(runs[e.kind].row);
      write_report_csv(run_dir / "report.csv", rows);
    } catch (const std::exception& ex) {
      report.note(std::string(kind_name(e.kind)) + " pipeline failed: " + ex.what());
    }
  }

  report.record(2, "chunk counts and compression rates", [&] {
    Outcome o{runs.size() == 4, ""};
    for (const auto& e : kExpected) {
      const std::size_t chunks = chunk_count_for(e.params, 2048);
      const double rate = expected_compression_rate(e.params, 2048, 64);
      bool ok = chunks == e.chunks && std::abs(rate - e.rate) <= 1e-6 &&
                std::abs(rate - e.rounded_rate) < 0.005 && rate > 30.0 && rate < 32.0;
      if (runs.count(e.kind)) {
        const LatentArchive& a = runs[e.kind].archive;
        ok = ok && a.n_chunks == e.chunks && std::abs(compression_rate(a) - e.rate) <= 1e-6;
      }
      o.pass = o.pass && ok;
      o.detail += std::string(kind_name(e.kind)) + " " + std::to_string(chunks) + " chunks " +
                  fmt(rate, 6) + "x; ";
    }
    return o;
  });

  report.record(7, "reconstructed accuracy within 2 points at latent 64", [&] {
    Outcome o{runs.size() == 4, ""};
    for (const auto& [kind, r] : runs) {
      const double drop = r.row.acc_original - r.row.acc_reconstructed;
      o.pass = o.pass && std::abs(drop) <= kRetention && r.row.vae_epochs <= 500;
      o.detail += std::string(kind_name(kind)) + " " + fmt(100 * r.row.acc_original, 2) + "->" +
                  fmt(100 * r.row.acc_reconstructed, 2) + "% (" +
                  std::to_string(r.row.vae_epochs) + " ep); ";
    }
    return o;
  });

  if (runs.count(ModelKind::kFnn) && runs.count(ModelKind::kLstm)) {
    const std::size_t fnn = epochs_to_reach(runs[ModelKind::kFnn].vae.curve, 1.1);
    const std::size_t lstm = epochs_to_reach(runs[ModelKind::kLstm].vae.curve, 1.1);
    report.note("epochs to reach 1.1x final training loss: fnn " + std::to_string(fnn) +
                ", lstm " + std::to_string(lstm));
  }

  const ModelKind sweep_kind = kExpected[kSweepKindIndex].kind;
  report.record(8, "latent 128 vs 64 accuracy within 2 points (" +
                       std::string(kind_name(sweep_kind)) + ")", [&] {
    if (!runs.count(sweep_kind)) return Outcome{false, "no latent-64 run"};
    RunConfig c = cfg;
    c.out_dir = sweep_dir;
    c.latent_dim = 128;
    const PipelineOutcome r128 = run_pipeline_kind(sweep_kind, base[sweep_kind], mnist.test, c, log);
    const double a64 = runs[sweep_kind].row.acc_reconstructed;
    const double a128 = r128.row.acc_reconstructed;
    SweepOutcome s;
    s.kind = sweep_kind;
    s.acc_original = runs[sweep_kind].row.acc_original;
    for (const PipelineOutcome* r : {&r128, static_cast<const PipelineOutcome*>(&runs[sweep_kind])}) {
      SweepRow row;
      row.latent_dim = r->row.latent_dim;
      row.epochs = r->row.vae_epochs;
      row.best_epoch = r->row.vae_best_epoch;
      row.best_val_loss = r->row.vae_best_val_loss;
      row.accuracy = r->row.acc_reconstructed;
      row.seconds = r->row.vae_train_seconds;
      s.rows.push_back(row);
      s.rates.push_back(r->row.rate);
    }
    write_sweep_csv(work / "sweep.csv", s);
    return Outcome{std::abs(a128 - a64) <= kRetention,
                   "d=128 " + fmt(100 * a128, 2) + "%, d=64 " + fmt(100 * a64, 2) + "%"};
  });

  report.record(9, "NNWT/VAEC round trips and corruption rejection", [&] {
    if (runs.empty()) return Outcome{false, "no artifacts"};
    std::size_t checked = 0;
    bool ok = true;
    auto rejects = [](const std::function<void()>& f) {
      try {
        f();
      } catch (const FormatError&) {
        return true;
      }
      return false;
    };
    for (const auto& [kind, r] : runs) {
      for (const fs::path& p : {base_weights_path(run_dir, kind), vae_path(run_dir, kind),
                                reconstructed_path(run_dir, kind)}) {
        const auto bytes = read_file(p);
        const WeightFile w = decode_weights(bytes);
        ok = ok && encode_weights(w) == bytes;
        auto bad = bytes;
        bad[1] ^= 0xFF;
        ok = ok && rejects([&] { decode_weights(bad); });
        ok = ok && rejects([&] { decode_weights(std::span(bytes).first(bytes.size() - 1)); });
        ok = ok && rejects([&] { decode_weights(std::span(bytes).first(bytes.size() / 2)); });
        ++checked;
      }
      ok = ok && testing::bit_identical(load_weights(base_weights_path(run_dir, kind)).params,
                                        base[kind]);
      const auto bytes = read_file(archive_path(run_dir, kind));
      const LatentArchive a = decode_archive(bytes);
      ok = ok && a == r.archive && encode_archive(a) == bytes;
      auto bad = bytes;
      bad[0] = 'X';
      ok = ok && rejects([&] { decode_archive(bad); });
      ok = ok && rejects([&] { decode_archive(std::span(bytes).first(bytes.size() - 1)); });
      ok = ok && rejects([&] { decode_archive(std::span(bytes).first(20)); });
      ++checked;
    }
    return Outcome{ok && checked == 4 * runs.size(),
                   std::to_string(checked) + " files round-tripped, corruptions rejected"};
  });

  report.record(10, "rerun with identical seeds reproduces archive and accuracy (" +
                        std::string(kind_name(sweep_kind)) + ")", [&] {
    if (!runs.count(sweep_kind)) return Outcome{false, "no first run"};
    RunConfig c = cfg;
    c.out_dir = rerun_dir;
    const PipelineOutcome again = run_pipeline_kind(sweep_kind, base[sweep_kind], mnist.test, c, log);
    const bool same_archive =
        read_file(archive_path(run_dir, sweep_kind)) == read_file(archive_path(rerun_dir, sweep_kind));
    const bool same_acc = again.row.acc_reconstructed == runs[sweep_kind].row.acc_reconstructed &&
                          again.row.acc_original == runs[sweep_kind].row.acc_original;
    return Outcome{same_archive && same_acc,
                   std::string("archive ") + (same_archive ? "identical" : "differs") +
                       ", accuracy " + (same_acc ? "identical" : "differs")};
  });

  return report.finish();
}
