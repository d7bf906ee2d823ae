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

#include <stdexcept>

#include "mcdrop/sweep.hpp"

namespace mcdrop {

namespace fs = std::filesystem;

namespace {

void say(const SweepOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

fs::path manifest_path(const fs::path& dir) { return dir / "manifest.jsonl"; }

// Settings that must agree before a stored sweep is continued.
bool same_plan(const SweepManifest& a, const SweepManifest& b) {
  if (a.sweep_id != b.sweep_id || a.models != b.models || a.passes != b.passes ||
      a.eval_batch != b.eval_batch || !(a.seeds == b.seeds) || !(a.corpus == b.corpus)) {
    return false;
  }
  if (a.dropout_configs.size() != b.dropout_configs.size()) return false;
  for (std::size_t i = 0; i < a.dropout_configs.size(); ++i) {
    const auto& x = a.dropout_configs[i];
    const auto& y = b.dropout_configs[i];
    if (x.name != y.name || x.attention_rate != y.attention_rate || x.ffn_rate != y.ffn_rate) {
      return false;
    }
  }
  return true;
}

SweepResult execute(SweepManifest m, const fs::path& dir, const SweepOptions& opts) {
  SweepResult result;
  result.directory = dir;
  const auto split_data = resolve_corpus(m.corpus, m.seeds.data);
  say(opts, "corpus: " + std::to_string(split_data.train.size()) + " train, " +
                std::to_string(split_data.test.size()) + " test");
  for (const auto& [name, part] : {std::pair{"train", &split_data.train}, {"test", &split_data.test}}) {
    const fs::path p = dir / "data" / (std::string(name) + ".jsonl");
    if (!fs::exists(p)) write_file_atomic(p, serialize_samples(*part));
  }

  const std::size_t per_model = m.dropout_configs.size();
  bool stopped = false;
  for (std::size_t mi = 0; mi < m.models.size() && !stopped; ++mi) {
    const auto& spec = m.models[mi];
    std::size_t remaining = 0;
    for (std::size_t k = 0; k < per_model; ++k) {
      remaining += m.cells[mi * per_model + k].status != CellStatus::kEvaluated;
    }
    result.cells_skipped += per_model - remaining;
    if (remaining == 0) continue;
    if (opts.max_cells && result.cells_evaluated >= opts.max_cells) {
      stopped = true;
      break;
    }

    const fs::path ckpt_path = dir / "raw" / "checkpoints" / (spec.name + ".ckpt");
    Checkpoint ckpt;
    try {
      if (fs::exists(ckpt_path)) {
        ckpt = load_checkpoint(ckpt_path);
        say(opts, spec.name + ": reusing trained checkpoint");
      } else {
        say(opts, spec.name + ": training");
        TrainConfig cfg = m.training;
        cfg.seed = m.seeds.training;
        const auto init = build_for_corpus(spec.config, split_data,
                                           cell_seed(m.seeds.init, spec.name, "init"));
        auto trained = train(init, split_data, cfg);
        trained.checkpoint.provenance = "sweep " + m.sweep_id + ", model " + spec.name;
        save_checkpoint(trained.checkpoint, ckpt_path);
        write_file_atomic(dir / "raw" / "history" / (spec.name + ".jsonl"),
                          serialize_history(trained.history));
        ckpt = std::move(trained.checkpoint);
        ++result.training_runs;
        for (std::size_t k = 0; k < per_model; ++k) {
          auto& c = m.cells[mi * per_model + k];
          if (c.status == CellStatus::kPending) c.status = CellStatus::kTrained;
        }
        save_manifest(m, manifest_path(dir));
      }
    } catch (const std::exception& e) {
      say(opts, spec.name + ": training failed: " + e.what());
      for (std::size_t k = 0; k < per_model; ++k) {
        auto& c = m.cells[mi * per_model + k];
        if (c.status == CellStatus::kEvaluated) continue;
        c.status = CellStatus::kFailed;
        c.error = std::string("training failed: ") + e.what();
        ++result.cells_failed;
      }
      save_manifest(m, manifest_path(dir));
      continue;
    }

    const std::string digest = checkpoint_digest(ckpt);
    for (std::size_t k = 0; k < per_model; ++k) {
      auto& c = m.cells[mi * per_model + k];
      if (c.status == CellStatus::kEvaluated) continue;
      if (opts.max_cells && result.cells_evaluated >= opts.max_cells) {
        stopped = true;
        break;
      }
      try {
        const auto pm = mc_run(ckpt, split_data.test, m.dropout_configs[k], m.passes, c.mc_seed,
                               InferenceMode::kStochastic, m.eval_batch);
        save_prediction_matrix(pm, dir / c.matrix);
        c.status = CellStatus::kEvaluated;
        c.checkpoint_digest = digest;
        c.error.clear();
        ++result.cells_evaluated;
        say(opts, c.model + "/" + c.config + ": evaluated");
      } catch (const std::exception& e) {
        c.status = CellStatus::kFailed;
        c.error = e.what();
        ++result.cells_failed;
        say(opts, c.model + "/" + c.config + ": failed: " + e.what());
      }
      save_manifest(m, manifest_path(dir));
    }
  }

  result.complete = !stopped;
  if (result.complete) {
    auto analysis = analyze_sweep(m, dir, opts.family_size, opts.alpha);
    result.bundle = report::make_bundle(m.sweep_id, opts.generated_at, std::move(analysis.summaries),
                                        std::move(analysis.comparisons));
    report::write_bundle(result.bundle, dir.parent_path());
  }
  result.manifest = std::move(m);
  return result;
}

}  // namespace

Checkpoint build_for_corpus(const ModelConfig& config, const DatasetSplit& data,
                            std::uint64_t init_seed) {
  const auto vocab = Vocabulary::build(data.train);
  ModelConfig c = config;
  c.vocab_size = vocab.size();
  Checkpoint ckpt = build(c, init_seed);
  ckpt.vocabulary = vocab.tokens();
  return ckpt;
}

DatasetSplit resolve_corpus(const CorpusSource& corpus, std::uint64_t data_seed) {
  std::vector<Sample> samples;
  if (corpus.ingest_path.empty()) {
    samples = generate_corpus(corpus.per_domain, data_seed);
  } else {
    if (!fs::is_regular_file(corpus.ingest_path)) {
      throw std::runtime_error("corpus source '" + corpus.ingest_path + "' cannot be read");
    }
    samples = ingest(corpus.ingest_path);
  }
  if (samples.empty()) throw std::runtime_error("corpus source yields no samples");
  return split(samples, corpus.train_fraction, data_seed);
}

SweepResult run_sweep(const SweepManifest& manifest, const fs::path& root,
                      const SweepOptions& options) {
  SweepManifest m = manifest;
  if (m.cells.empty()) m.reset_cells();
  m.validate();
  const fs::path dir = root / m.sweep_id;
  if (fs::exists(manifest_path(dir))) {
    SweepManifest stored = load_manifest(manifest_path(dir));
    if (!same_plan(stored, m)) {
      throw std::invalid_argument("a different sweep is already stored under " + dir.string());
    }
    m = std::move(stored);
  } else {
    // Fail on an unreadable corpus before anything is written.
    resolve_corpus(m.corpus, m.seeds.data);
    save_manifest(m, manifest_path(dir));
  }
  return execute(std::move(m), dir, options);
}

SweepResult resume_sweep(const fs::path& sweep_dir, const SweepOptions& options) {
  return execute(load_manifest(manifest_path(sweep_dir)), sweep_dir, options);
}

SweepAnalysis analyze_sweep(const SweepManifest& m, const fs::path& dir, std::size_t family_size,
                            double alpha) {
  SweepAnalysis out;
  struct Loaded {
    const SweepCell* cell;
    RunAccuracies acc;
  };
  std::vector<Loaded> loaded;
  for (const auto& c : m.cells) {
    if (c.status != CellStatus::kEvaluated) continue;
    const auto parsed = load_prediction_matrix(dir / c.matrix);
    if (!parsed.warnings.empty()) {
      throw ValidationError(c.matrix + ": " + parsed.warnings.front());
    }
    std::string family;
    for (const auto& spec : m.models) {
      if (spec.name == c.model) family = to_string(spec.config.family);
    }
    auto acc = run_level_accuracy(parsed.matrix);
    out.summaries.push_back({c.model, family, c.config, summarize(acc)});
    loaded.push_back({&c, std::move(acc)});
  }

  // Deterministic inference against every other configuration, per model.
  std::vector<std::pair<const Loaded*, const Loaded*>> pairs;
  for (const auto& det : loaded) {
    if (det.cell->config != "deterministic") continue;
    for (const auto& other : loaded) {
      if (other.cell->model == det.cell->model && &other != &det) pairs.emplace_back(&det, &other);
    }
  }
  const std::size_t family = family_size ? family_size : pairs.size();
  if (m.passes >= 2) {
    for (const auto& [det, other] : pairs) {
      out.comparisons.push_back(stats::compare(det->acc.overall, other->acc.overall, family, alpha,
                                               det->cell->model + "/" + det->cell->config,
                                               other->cell->model + "/" + other->cell->config));
    }
    const auto baseline = stats::select_config(out.summaries, "baseline");
    if (baseline.size() >= 4) {
      const auto quartiles = stats::stability_quartiles(baseline, alpha);
      out.comparisons.insert(out.comparisons.end(), quartiles.comparisons.begin(),
                             quartiles.comparisons.end());
    }
  }
  return out;
}

}  // namespace mcdrop
