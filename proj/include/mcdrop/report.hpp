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

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mcdrop/mc_eval.hpp"
#include "mcdrop/stats.hpp"

namespace mcdrop::report {

/// A named rendered file (table or figure) held in memory.
struct Document {
  std::string name;
  std::string content;

  friend bool operator==(const Document&, const Document&) = default;
};

/// Per-family slice of the memory-bias census.
struct CensusRow {
  std::string group;  // "all" or a family name
  stats::CountFraction positive;
  double mean_memory = 0;
  double mean_reasoning = 0;
  double mean_delta = 0;
};

struct ReportBundle {
  std::string sweep_id;
  std::string generated_at;  // supplied by the caller, never read from a clock
  std::string top_config = "baseline";
  std::size_t top_k = 5;
  std::size_t figure_models = 5;

  // Raw records; everything below is derived from these.
  std::vector<SummaryRecord> summaries;
  std::vector<stats::ComparisonResult> comparisons;

  std::vector<SummaryRecord> top_table;
  stats::DegradationTable degradation_table;
  std::vector<stats::ConfigEffectRow> config_effect_table;
  std::vector<CensusRow> bias_census;
  std::vector<Document> figures;
};

/// Builds the derived tables and figures from raw records.
ReportBundle make_bundle(std::string sweep_id, std::string generated_at,
                         std::vector<SummaryRecord> summaries,
                         std::vector<stats::ComparisonResult> comparisons = {},
                         std::size_t top_k = 5);

/// Recomputes the derived tables and figures after the raw records or the
/// selection settings change.
void rebuild_derived(ReportBundle& bundle);

/// Top-k by overall mean under one config, ties broken by model id.
std::vector<SummaryRecord> top_models(const std::vector<SummaryRecord>& records,
                                      const std::string& config, std::size_t k);

std::vector<CensusRow> census_by_family(const std::vector<SummaryRecord>& records,
                                        const std::string& config);

// Fixed-precision formatting shared by every renderer.
std::string fmt_accuracy(double v);  // 3 decimals
std::string fmt_std(double v);       // 4 decimals
std::string fmt_gap(double v);       // signed, 3 decimals
std::string fmt_stat(double v);      // 6 significant digits, inf/nan spelled out
std::string fmt_exact(double v);     // round-trip precision

/// Aligned .txt and .csv documents for every table.
std::vector<Document> render_tables(const ReportBundle& bundle);

/// Grouped bar charts (deterministic vs baseline) for overall, memory and
/// reasoning accuracy over the most-degraded models.
std::vector<Document> render_figures(const ReportBundle& bundle);

/// Serialized raw records: summaries, comparisons and bundle metadata.
std::vector<Document> render_raw(const ReportBundle& bundle);

/// Writes root/sweep_id/{tables,figures,raw}; returns root/sweep_id.
std::filesystem::path write_bundle(const ReportBundle& bundle, const std::filesystem::path& root);

/// Rebuilds a bundle from the raw/ records under `dir` (a sweep_id folder).
ReportBundle load_bundle(const std::filesystem::path& dir);

struct AuditReport {
  bool ok = false;
  std::size_t files_checked = 0;
  std::size_t numbers_checked = 0;
  std::vector<std::string> problems;
};

/// Re-derives every number in tables/ and figures/ from raw/ records and
/// checks that re-rendering reproduces each file byte for byte.
AuditReport audit_bundle(const std::filesystem::path& dir);

}  // namespace mcdrop::report
