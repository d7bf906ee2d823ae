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
#include <span>
#include <string>
#include <vector>

#include "mcdrop/jsonl.hpp"
#include "mcdrop/mc_eval.hpp"

namespace mcdrop::stats {

/// Regularized incomplete beta I_x(a, b), evaluated with a modified Lentz
/// continued fraction (switching to 1 - I_{1-x}(b, a) past the mean).
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees
/// of freedom.
double student_t_two_sided_p(double t, double df);

inline double bonferroni_threshold(double alpha, std::size_t family_size) {
  return alpha / static_cast<double>(family_size);
}
double bonferroni_adjust(double p_raw, std::size_t family_size);

struct ComparisonResult {
  std::string label_a;
  std::string label_b;
  double mean_diff = 0;  // mean(a) - mean(b)
  double t_stat = 0;     // Welch
  double df = 0;         // Welch-Satterthwaite
  double p_raw = 1;
  double p_adjusted = 1;
  double alpha = 0.05;
  double alpha_adjusted = 0.05;
  std::size_t family_size = 1;
  double cohens_d = 0;
  bool significant = false;
  /// Set when at least one group has zero variance.
  bool degenerate = false;
};

/// Welch's unequal-variance t-test of a against b with Bonferroni correction
/// over `family_size` tests and Cohen's d (pooled sample std).
///
/// Zero-variance groups: when both are constant and equal the result is a
/// null difference; when exactly one is constant, d is scaled by the other
/// group's std and df is clamped to [min(n)-1, n_a+n_b-2].
ComparisonResult compare(std::span<const double> a, std::span<const double> b,
                         std::size_t family_size, double alpha = 0.05,
                         std::string label_a = "a", std::string label_b = "b");

json comparison_to_json(const ComparisonResult& r);
ComparisonResult comparison_from_json(const json& j);

// ---------------------------------------------------------------------------
// Cross-model tables over SummaryRecords.

struct CountFraction {
  std::size_t count = 0;
  std::size_t total = 0;
  double fraction = 0;
};

CountFraction count_fraction(std::size_t count, std::size_t total);

struct DegradationEntry {
  std::string model_id;
  double deterministic_mean = 0;
  double deterministic_std = 0;
  double baseline_mean = 0;
  double baseline_std = 0;
  double degradation = 0;  // baseline_mean - deterministic_mean
};

struct DegradationTable {
  std::vector<DegradationEntry> entries;  // most negative degradation first
  CountFraction negative;                 // models where deterministic wins
  std::vector<std::string> warnings;
};

DegradationTable degradation_table(const std::vector<SummaryRecord>& records,
                                   const std::string& deterministic_config = "deterministic",
                                   const std::string& baseline_config = "baseline");

struct ConfigEffectRow {
  std::string config;
  std::size_t models = 0;
  double mean_memory = 0;
  double mean_reasoning = 0;
  double gap = 0;  // mean_memory - mean_reasoning
};

/// One row per configuration: the five presets in canonical order first,
/// then any other configurations by name. Unweighted means across models;
/// records without both domains are skipped.
std::vector<ConfigEffectRow> config_effect_table(const std::vector<SummaryRecord>& records);

struct StabilityQuartiles {
  std::vector<std::string> ranked;  // ascending std_overall, ties by model id
  std::vector<std::string> bottom;  // most stable quarter
  std::vector<std::string> top;     // least stable quarter
  /// Overall, memory, reasoning; empty when a quartile has fewer than two
  /// models or lacks domain means.
  std::vector<ComparisonResult> comparisons;
};

inline constexpr std::size_t kQuartileFamilySize = 3;

StabilityQuartiles stability_quartiles(const std::vector<SummaryRecord>& records,
                                       double alpha = 0.05);

struct BiasCensus {
  CountFraction positive;  // delta_cog > 0
  double mean_delta = 0;
  std::vector<std::string> warnings;
};

BiasCensus memory_bias_census(const std::vector<SummaryRecord>& records);

/// Records of one configuration.
std::vector<SummaryRecord> select_config(const std::vector<SummaryRecord>& records,
                                         const std::string& config);

}  // namespace mcdrop::stats
