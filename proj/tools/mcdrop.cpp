// Copyright 2026 The mcdrop Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// mcdrop: command-line entry point for data generation, training, MC
// evaluation, statistics, reporting, replay verification and sweeps.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>

#include "CLI11.hpp"
#include "mcdrop/mc_eval.hpp"
#include "mcdrop/report.hpp"
#include "mcdrop/stats.hpp"
#include "mcdrop/sweep.hpp"
#include "mcdrop/tasks.hpp"
#include "mcdrop/trainer.hpp"

namespace fs = std::filesystem;
using namespace mcdrop;

namespace {

constexpr const char* kOutEnv = "MCDROP_OUT";
constexpr const char* kTimestampEnv = "MCDROP_TIMESTAMP";

std::string default_out_root() {
  const char* env = std::getenv(kOutEnv);
  return env && *env ? env : "mcdrop-out";
}

std::string default_timestamp() {
  if (const char* env = std::getenv(kTimestampEnv); env && *env) return env;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void log_line(const std::string& s) { std::cerr << s << "\n"; }

DropoutConfig resolve_dropout(const std::string& name, double attention, double ffn) {
  if (attention >= 0 || ffn >= 0) {
    DropoutConfig d{name.empty() ? "custom" : name, Real(std::max(attention, 0.0)),
                    Real(std::max(ffn, 0.0))};
    d.validate();
    return d;
  }
  auto preset = find_dropout_preset(name);
  if (!preset) throw std::invalid_argument("unknown dropout config '" + name + "'");
  return *preset;
}

void print_comparison(const stats::ComparisonResult& c) {
  std::cout << jsonl_line(stats::comparison_to_json(c));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo dropout profiling of small transformers"};
  app.require_subcommand(1);

  // generate-data
  auto* gen = app.add_subcommand("generate-data", "Write a synthetic memory/reasoning corpus");
  std::string gen_out;
  std::size_t gen_per_domain = 500;
  std::uint64_t gen_seed = 42;
  double gen_fraction = 0.8;
  bool gen_split = false;
  gen->add_option("--out", gen_out, "Output file (ingestion format), or folder with --split")->required();
  gen->add_option("--per-domain", gen_per_domain, "Samples per domain")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Generation and split seed")->capture_default_str();
  gen->add_flag("--split", gen_split, "Write train.jsonl and test.jsonl instead of one file");
  gen->add_option("--train-fraction", gen_fraction, "Train share per domain")->capture_default_str();

  // train
  auto* tr = app.add_subcommand("train", "Train one model and store its checkpoint");
  std::string tr_data, tr_model = "model:encoder:4:2:32:64", tr_out;
  std::uint64_t tr_seed = 42, tr_init_seed = 7, tr_data_seed = 42;
  std::size_t tr_per_domain = 500;
  TrainConfig tcfg;
  double tr_lr = tcfg.learning_rate, tr_warmup = tcfg.warmup_fraction, tr_clip = tcfg.clip_norm,
         tr_decay = tcfg.weight_decay;
  std::size_t tr_max_len = 32;
  tr->add_option("--data", tr_data, "Ingestion file (default: synthetic corpus)");
  tr->add_option("--per-domain", tr_per_domain, "Synthetic samples per domain")->capture_default_str();
  tr->add_option("--data-seed", tr_data_seed, "Corpus and split seed")->capture_default_str();
  tr->add_option("--models", tr_model, "Model spec name:family:layers:heads:d_model:d_ffn[:pooling]")
      ->capture_default_str();
  tr->add_option("--max-seq-len", tr_max_len, "Maximum sequence length")->capture_default_str();
  tr->add_option("--out", tr_out, "Output folder (default: $MCDROP_OUT/<model>)");
  tr->add_option("--seed", tr_seed, "Training seed")->capture_default_str();
  tr->add_option("--init-seed", tr_init_seed, "Initialization seed")->capture_default_str();
  tr->add_option("--lr", tr_lr, "Peak learning rate")->capture_default_str();
  tr->add_option("--warmup", tr_warmup, "Warmup fraction")->capture_default_str();
  tr->add_option("--epochs", tcfg.epochs, "Epochs")->capture_default_str();
  tr->add_option("--batch", tcfg.train_batch, "Training batch size")->capture_default_str();
  tr->add_option("--clip", tr_clip, "Gradient norm clip")->capture_default_str();
  tr->add_option("--weight-decay", tr_decay, "Decoupled weight decay")->capture_default_str();

  // mc-eval
  auto* mc = app.add_subcommand("mc-eval", "Run MC dropout passes and store the prediction matrix");
  std::string mc_ckpt, mc_data, mc_config = "baseline", mc_out, mc_mode = "stochastic";
  double mc_att = -1, mc_ffn = -1;
  std::size_t mc_passes = 100, mc_batch = 32;
  std::uint64_t mc_seed = 0;
  mc->add_option("--checkpoint", mc_ckpt, "Checkpoint file")->required();
  mc->add_option("--data", mc_data, "Test samples (ingestion format)")->required();
  mc->add_option("--configs", mc_config, "Dropout preset name")->capture_default_str();
  mc->add_option("--attention-rate", mc_att, "Custom attention dropout rate");
  mc->add_option("--ffn-rate", mc_ffn, "Custom feed-forward dropout rate");
  mc->add_option("--passes", mc_passes, "Number of passes M")->capture_default_str();
  mc->add_option("--seed", mc_seed, "Base seed")->capture_default_str();
  mc->add_option("--eval-batch", mc_batch, "Evaluation batch size")->capture_default_str();
  mc->add_option("--mode", mc_mode, "stochastic or deterministic")->capture_default_str();
  mc->add_option("--out", mc_out, "Output prediction matrix file")->required();

  // stats
  auto* st = app.add_subcommand("stats", "Summaries and corrected tests over prediction matrices");
  std::vector<std::string> st_matrices;
  std::size_t st_family = 0;
  double st_alpha = 0.05;
  st->add_option("--matrices", st_matrices, "Prediction matrices; the first is the reference")
      ->required();
  st->add_option("--family-size", st_family, "Bonferroni family size (default: number of tests)");
  st->add_option("--alpha", st_alpha, "Family-wise alpha")->capture_default_str();

  // report
  auto* rp = app.add_subcommand("report", "Render tables and figures for a sweep folder");
  std::string rp_dir, rp_time;
  std::size_t rp_family = 0, rp_top = 5;
  bool rp_audit_only = false;
  rp->add_option("--sweep", rp_dir, "Sweep folder holding manifest.jsonl")->required();
  rp->add_option("--generated-at", rp_time, "Timestamp to stamp on the report");
  rp->add_option("--family-size", rp_family, "Bonferroni family size");
  rp->add_option("--top-k", rp_top, "Rows in the top-models table")->capture_default_str();
  rp->add_flag("--audit", rp_audit_only, "Only audit the rendered files against raw records");

  // verify
  auto* vf = app.add_subcommand("verify", "Replay a prediction matrix and compare bit for bit");
  std::string vf_matrix, vf_ckpt, vf_data;
  vf->add_option("--matrix", vf_matrix, "Stored prediction matrix")->required();
  vf->add_option("--checkpoint", vf_ckpt, "Checkpoint the matrix was produced with")->required();
  vf->add_option("--data", vf_data, "Test samples (ingestion format)")->required();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Train and evaluate a models x configs grid");
  std::string sw_manifest, sw_models, sw_configs, sw_out, sw_id = "sweep", sw_time, sw_scale;
  std::size_t sw_passes = 100, sw_family = 0, sw_max_cells = 0, sw_per_domain = 500;
  std::uint64_t sw_seed = 0;
  double sw_lr = -1;
  std::size_t sw_epochs = 0;
  bool sw_resume = false, sw_plan = false;
  sw->add_option("--manifest", sw_manifest, "Manifest file to run");
  sw->add_option("--models", sw_models, "Comma-separated model specs");
  sw->add_option("--configs", sw_configs, "Comma-separated dropout presets (default: all five)");
  sw->add_option("--scale", sw_scale, "Built-in grid: desk or full")
      ->check(CLI::IsMember({"desk", "full"}));
  sw->add_option("--sweep-id", sw_id, "Sweep folder name")->capture_default_str();
  sw->add_option("--passes", sw_passes, "Passes per cell")->capture_default_str();
  sw->add_option("--seed", sw_seed, "Sweep seed for per-cell MC seeds")->capture_default_str();
  sw->add_option("--per-domain", sw_per_domain, "Synthetic samples per domain")->capture_default_str();
  sw->add_option("--lr", sw_lr, "Peak learning rate override");
  sw->add_option("--epochs", sw_epochs, "Epoch override");
  sw->add_option("--out", sw_out, "Output root (default: $MCDROP_OUT or ./mcdrop-out)");
  sw->add_option("--family-size", sw_family, "Bonferroni family size");
  sw->add_option("--generated-at", sw_time, "Timestamp to stamp on the report");
  sw->add_option("--max-cells", sw_max_cells, "Stop after this many evaluations");
  sw->add_flag("--resume", sw_resume, "Continue the sweep stored under the output root");
  sw->add_flag("--plan", sw_plan, "Print the cell grid and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      const auto samples = generate_corpus(gen_per_domain, gen_seed);
      if (gen_split) {
        const auto parts = split(samples, gen_fraction, gen_seed);
        write_file_atomic(fs::path(gen_out) / "train.jsonl", serialize_samples(parts.train));
        write_file_atomic(fs::path(gen_out) / "test.jsonl", serialize_samples(parts.test));
        std::cout << "train " << parts.train.size() << ", test " << parts.test.size() << "\n";
      } else {
        write_file_atomic(gen_out, serialize_samples(samples));
        std::cout << samples.size() << " samples\n";
      }
      return 0;
    }

    if (tr->parsed()) {
      auto spec = parse_model_spec(tr_model);
      spec.config.max_seq_len = tr_max_len;
      CorpusSource corpus;
      corpus.ingest_path = tr_data;
      corpus.per_domain = tr_per_domain;
      const auto data = resolve_corpus(corpus, tr_data_seed);
      tcfg.learning_rate = Real(tr_lr);
      tcfg.warmup_fraction = Real(tr_warmup);
      tcfg.clip_norm = Real(tr_clip);
      tcfg.weight_decay = Real(tr_decay);
      tcfg.seed = tr_seed;
      const fs::path out = tr_out.empty() ? fs::path(default_out_root()) / spec.name : fs::path(tr_out);
      auto result = train(build_for_corpus(spec.config, data, tr_init_seed), data, tcfg);
      result.checkpoint.provenance = "model " + spec.name;
      save_checkpoint(result.checkpoint, out / "checkpoint.ckpt");
      write_file_atomic(out / "history.jsonl", serialize_history(result.history));
      write_file_atomic(out / "train.jsonl", serialize_samples(data.train));
      write_file_atomic(out / "test.jsonl", serialize_samples(data.test));
      for (const auto& e : result.history) {
        std::cout << "epoch " << e.epoch << " loss " << e.loss << " accuracy " << e.accuracy << "\n";
      }
      std::cout << "checkpoint " << (out / "checkpoint.ckpt").string() << " digest "
                << checkpoint_digest(result.checkpoint) << "\n";
      return 0;
    }

    if (mc->parsed()) {
      const auto ckpt = load_checkpoint(mc_ckpt);
      const auto test = ingest(mc_data);
      const auto dropout = resolve_dropout(mc_config, mc_att, mc_ffn);
      const auto pm = mc_run(ckpt, test, dropout, mc_passes, mc_seed,
                             inference_mode_from_string(mc_mode), mc_batch);
      save_prediction_matrix(pm, mc_out);
      const auto s = summarize(pm);
      std::cout << jsonl_line(summary_to_json({"", "", dropout.name, s}));
      return 0;
    }

    if (st->parsed()) {
      std::vector<PredictionMatrix> matrices;
      for (const auto& path : st_matrices) {
        auto parsed = load_prediction_matrix(path);
        for (const auto& w : parsed.warnings) std::cerr << path << ": warning: " << w << "\n";
        matrices.push_back(std::move(parsed.matrix));
      }
      std::vector<RunAccuracies> acc;
      for (std::size_t i = 0; i < matrices.size(); ++i) {
        acc.push_back(run_level_accuracy(matrices[i]));
        std::cout << jsonl_line(
            summary_to_json({st_matrices[i], "", matrices[i].dropout.name, summarize(acc.back())}));
      }
      const std::size_t tests = matrices.size() - 1;
      const std::size_t family = st_family ? st_family : std::max<std::size_t>(tests, 1);
      std::cerr << "alpha " << st_alpha << " / " << family << " = "
                << stats::bonferroni_threshold(st_alpha, family) << "\n";
      for (std::size_t i = 1; i < matrices.size(); ++i) {
        print_comparison(stats::compare(acc[0].overall, acc[i].overall, family, st_alpha,
                                        st_matrices[0], st_matrices[i]));
      }
      return 0;
    }

    if (rp->parsed()) {
      const fs::path dir(rp_dir);
      if (!rp_audit_only) {
        const auto manifest = load_manifest(dir / "manifest.jsonl");
        auto analysis = analyze_sweep(manifest, dir, rp_family);
        const auto bundle = report::make_bundle(
            manifest.sweep_id, rp_time.empty() ? default_timestamp() : rp_time,
            std::move(analysis.summaries), std::move(analysis.comparisons), rp_top);
        report::write_bundle(bundle, dir.parent_path());
      }
      const auto audit = report::audit_bundle(dir);
      for (const auto& p : audit.problems) std::cerr << "audit: " << p << "\n";
      std::cout << "audit " << (audit.ok ? "passed" : "failed") << ": " << audit.files_checked
                << " files, " << audit.numbers_checked << " numbers\n";
      return audit.ok ? 0 : 1;
    }

    if (vf->parsed()) {
      const auto parsed = load_prediction_matrix(vf_matrix);
      for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << "\n";
      const auto report = verify_matrix(parsed.matrix, load_checkpoint(vf_ckpt), ingest(vf_data));
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& m : report.mismatches) {
        std::cout << "mismatch: pass " << m.pass << ", sample " << m.sample << " (" << m.sample_id
                  << "), " << m.field << "\n";
      }
      std::cout << (report.ok ? "verified" : "verification failed") << "\n";
      return report.ok ? 0 : 1;
    }

    if (sw->parsed()) {
      const fs::path root = sw_out.empty() ? fs::path(default_out_root()) : fs::path(sw_out);
      SweepOptions opts;
      opts.generated_at = sw_time.empty() ? default_timestamp() : sw_time;
      opts.family_size = sw_family;
      opts.max_cells = sw_max_cells;
      opts.log = log_line;

      SweepResult result;
      if (sw_resume) {
        result = resume_sweep(root / sw_id, opts);
      } else {
        SweepManifest m;
        if (!sw_manifest.empty()) {
          m = load_manifest(sw_manifest);
        } else {
          if (sw_scale == "desk") {
            m = desk_scale_manifest();
          } else if (sw_scale == "full") {
            m = full_grid_manifest();
          } else if (sw_models.empty()) {
            throw std::invalid_argument("sweep needs --manifest, --models or --scale");
          }
          if (!sw_models.empty()) m.models = parse_model_specs(sw_models);
          if (!sw_configs.empty()) m.dropout_configs = parse_dropout_list(sw_configs);
          if (sw->count("--sweep-id") || sw_scale.empty()) m.sweep_id = sw_id;
          m.passes = sw_passes;
          m.seeds.mc = sw_seed;
          m.corpus.per_domain = sw_per_domain;
          if (sw_lr > 0) m.training.learning_rate = Real(sw_lr);
          if (sw_epochs > 0) m.training.epochs = sw_epochs;
          m.reset_cells();
        }
        if (sw_plan) {
          m.validate();
          std::cout << m.models.size() << " models x " << m.dropout_configs.size()
                    << " configs = " << m.cell_count() << " cells\n";
          for (const auto& c : m.cells) std::cout << c.model << " " << c.config << "\n";
          return 0;
        }
        result = run_sweep(m, root, opts);
      }
      std::cout << "trained " << result.training_runs << ", evaluated " << result.cells_evaluated
                << ", skipped " << result.cells_skipped << ", failed " << result.cells_failed
                << (result.complete ? "" : " (stopped early)") << "\n";
      std::cout << "output " << result.directory.string() << "\n";
      if (result.cells_failed) return 2;
      return result.complete ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
