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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mcdrop/mc_eval.hpp"
#include "mcdrop/model.hpp"
#include "mcdrop/report.hpp"
#include "mcdrop/trainer.hpp"

namespace mcdrop {

/// A named architecture, written "name:family:layers:heads:d_model:d_ffn[:pooling]".
struct ModelSpec {
  std::string name;
  ModelConfig config;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

ModelSpec parse_model_spec(std::string_view text);
std::string format_model_spec(const ModelSpec& spec);
/// Comma-separated list of specs.
std::vector<ModelSpec> parse_model_specs(std::string_view text);
/// Comma-separated preset names.
std::vector<DropoutConfig> parse_dropout_list(std::string_view text);

enum class CellStatus { kPending, kTrained, kEvaluated, kFailed };

std::string to_string(CellStatus status);
CellStatus cell_status_from_string(std::string_view s);

struct SweepCell {
  std::string model;
  std::string config;
  CellStatus status = CellStatus::kPending;
  std::uint64_t mc_seed = 0;
  std::string matrix;             // path relative to the sweep folder
  std::string checkpoint_digest;  // of the checkpoint the cell evaluated
  std::string error;

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepSeeds {
  std::uint64_t data = 42;      // corpus generation and split
  std::uint64_t init = 7;       // parameter initialization
  std::uint64_t training = 42;  // shuffling and training dropout
  std::uint64_t mc = 0;         // root of the per-cell MC seeds

  friend bool operator==(const SweepSeeds&, const SweepSeeds&) = default;
};

struct CorpusSource {
  /// Empty for the synthetic generators; otherwise an ingestion file.
  std::string ingest_path;
  std::size_t per_domain = 500;
  double train_fraction = 0.8;

  friend bool operator==(const CorpusSource&, const CorpusSource&) = default;
};

struct SweepManifest {
  std::string sweep_id = "sweep";
  std::vector<ModelSpec> models;
  std::vector<DropoutConfig> dropout_configs = standard_dropout_configs();
  std::size_t passes = 100;
  std::size_t eval_batch = 32;
  SweepSeeds seeds;
  CorpusSource corpus;
  TrainConfig training;
  /// Model-major grid of models x dropout_configs.
  std::vector<SweepCell> cells;

  /// Rebuilds `cells` as a fresh pending grid.
  void reset_cells();
  std::size_t cell_count() const { return cells.size(); }
  void validate() const;
  SweepCell& cell(const std::string& model, const std::string& config);
};

inline constexpr int kManifestFormatVersion = 1;

std::string serialize_manifest(const SweepManifest& manifest);
SweepManifest parse_manifest(const std::string& text, const std::string& source = "<memory>");
void save_manifest(const SweepManifest& manifest, const std::filesystem::path& path);
SweepManifest load_manifest(const std::filesystem::path& path);

/// MC base seed of a cell, derived from the sweep seed and both names.
std::uint64_t cell_seed(std::uint64_t sweep_seed, std::string_view model, std::string_view config);

/// 14 encoder and 5 decoder architectures under the five presets.
SweepManifest full_grid_manifest();

/// Two 4-layer models (one encoder, one decoder) under the five presets.
SweepManifest desk_scale_manifest();

struct SweepOptions {
  std::string generated_at = "unspecified";
  /// 0 for the number of deterministic-vs-config comparisons in the sweep.
  std::size_t family_size = 0;
  double alpha = 0.05;
  /// Stop after evaluating this many cells in this invocation (0 = no limit).
  std::size_t max_cells = 0;
  std::function<void(const std::string&)> log;
};

struct SweepResult {
  SweepManifest manifest;
  std::size_t training_runs = 0;
  std::size_t cells_evaluated = 0;  // in this invocation
  std::size_t cells_skipped = 0;    // already evaluated on entry
  std::size_t cells_failed = 0;
  bool complete = false;            // every cell evaluated or failed
  std::filesystem::path directory;
  report::ReportBundle bundle;      // populated once complete
};

/// Runs or resumes the sweep under root/sweep_id. The manifest file there is
/// the source of truth on resume; cells already evaluated are skipped and
/// their artifacts left untouched.
SweepResult run_sweep(const SweepManifest& manifest, const std::filesystem::path& root,
                      const SweepOptions& options = {});
SweepResult resume_sweep(const std::filesystem::path& sweep_dir, const SweepOptions& options = {});

/// Untrained checkpoint whose vocabulary is built from data.train.
Checkpoint build_for_corpus(const ModelConfig& config, const DatasetSplit& data,
                            std::uint64_t init_seed);

/// Corpus of a manifest, split for training and test; throws before any
/// training when an ingestion path cannot be read.
DatasetSplit resolve_corpus(const CorpusSource& corpus, std::uint64_t data_seed);

/// Summaries and deterministic-vs-config comparisons for evaluated cells.
struct SweepAnalysis {
  std::vector<SummaryRecord> summaries;
  std::vector<stats::ComparisonResult> comparisons;
};

SweepAnalysis analyze_sweep(const SweepManifest& manifest, const std::filesystem::path& sweep_dir,
                            std::size_t family_size = 0, double alpha = 0.05);

}  // namespace mcdrop
