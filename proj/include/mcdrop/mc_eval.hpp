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
#include <optional>
#include <string>
#include <vector>

#include "mcdrop/jsonl.hpp"
#include "mcdrop/model.hpp"
#include "mcdrop/tasks.hpp"

namespace mcdrop {

struct SampleMeta {
  std::string id;
  Domain domain = Domain::kMemory;
  bool label = false;

  friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

/// M stochastic passes over N samples, stored pass-major.
struct PredictionMatrix {
  std::size_t passes = 0;
  std::vector<SampleMeta> samples;
  std::vector<std::uint8_t> predictions;  // [passes * samples.size()]
  std::vector<double> probabilities;      // positive-class probability, same layout
  DropoutConfig dropout;
  InferenceMode mode = InferenceMode::kStochastic;
  std::uint64_t base_seed = 0;
  std::size_t eval_batch = 32;
  std::string checkpoint_digest;

  std::size_t sample_count() const { return samples.size(); }
  bool prediction(std::size_t pass, std::size_t sample) const {
    return predictions[pass * samples.size() + sample] != 0;
  }
  double probability(std::size_t pass, std::size_t sample) const {
    return probabilities[pass * samples.size() + sample];
  }

  /// Invariant violations, one message each; empty for a well-formed matrix.
  std::vector<std::string> check_invariants() const;
};

/// Runs `passes` forward passes over `test`. Pass m draws its masks from
/// RngStream(base_seed, m); batch b of a pass uses derive(b) of that stream.
PredictionMatrix mc_run(const Checkpoint& ckpt, const std::vector<Sample>& test,
                        const DropoutConfig& dropout, std::size_t passes = 100,
                        std::uint64_t base_seed = 0,
                        InferenceMode mode = InferenceMode::kStochastic,
                        std::size_t eval_batch = 32);

struct RunAccuracies {
  std::vector<double> overall;
  std::vector<double> memory;     // empty when no memory samples
  std::vector<double> reasoning;  // empty when no reasoning samples
};

/// Accuracy of every pass over all samples and per domain.
RunAccuracies run_level_accuracy(const PredictionMatrix& pm);

struct RunSummary {
  double mean_overall = 0;
  double std_overall = 0;
  std::optional<double> mean_memory;
  std::optional<double> std_memory;
  std::optional<double> mean_reasoning;
  std::optional<double> std_reasoning;
  std::optional<double> delta_cog;  // mean_memory - mean_reasoning

  /// True when a domain is missing and delta_cog is undefined.
  bool partial() const { return !delta_cog.has_value(); }
};

/// Population (divide-by-M) standard deviation.
double population_std(const std::vector<double>& values);
double mean_of(const std::vector<double>& values);

RunSummary summarize(const RunAccuracies& acc);
RunSummary summarize(const PredictionMatrix& pm);

/// Summary assembled from already-aggregated means (e.g. published tables);
/// delta_cog is derived when both domain means are given.
RunSummary summary_from_means(double mean_overall, double std_overall,
                              std::optional<double> mean_memory = std::nullopt,
                              std::optional<double> std_memory = std::nullopt,
                              std::optional<double> mean_reasoning = std::nullopt,
                              std::optional<double> std_reasoning = std::nullopt);

/// Memory-minus-reasoning differential.
inline double memory_reasoning_differential(double mean_memory, double mean_reasoning) {
  return mean_memory - mean_reasoning;
}

/// A summary tagged with the model and dropout configuration it came from.
struct SummaryRecord {
  std::string model_id;
  std::string family;
  std::string config;
  RunSummary summary;
};

json summary_to_json(const SummaryRecord& record);
SummaryRecord summary_from_json(const json& j);
std::string serialize_summaries(const std::vector<SummaryRecord>& records);
std::vector<SummaryRecord> parse_summaries(const std::string& text,
                                           const std::string& source = "<memory>");

// Prediction matrix file: a header record, N sample records, M pass records.
inline constexpr int kPredictionMatrixFormatVersion = 1;

std::string serialize_prediction_matrix(const PredictionMatrix& pm);

struct ParsedMatrix {
  PredictionMatrix matrix;
  std::vector<std::string> warnings;
};

/// Structural problems throw ParseError; invariant violations are returned
/// as warnings so that tampered files can still be inspected.
ParsedMatrix parse_prediction_matrix(const std::string& text,
                                     const std::string& source = "<memory>");
void save_prediction_matrix(const PredictionMatrix& pm, const std::filesystem::path& path);
ParsedMatrix load_prediction_matrix(const std::filesystem::path& path);

struct Mismatch {
  std::size_t pass;
  std::size_t sample;
  std::string sample_id;
  std::string field;  // "prediction" or "probability"
};

struct VerifyReport {
  bool ok = false;
  bool digest_matches = false;
  bool samples_match = false;
  std::vector<Mismatch> mismatches;
  std::vector<std::string> warnings;
};

/// Replays `stored` on `ckpt` and compares every cell bit for bit.
VerifyReport verify_matrix(const PredictionMatrix& stored, const Checkpoint& ckpt,
                           const std::vector<Sample>& test);

}  // namespace mcdrop
