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
#include <vector>

#include "mcdrop/mc_eval.hpp"
#include "mcdrop/model.hpp"
#include "mcdrop/tasks.hpp"

namespace mcdrop::testing {

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

ModelConfig tiny_config(Family family, std::size_t layers = 2, std::size_t vocab = 13,
                        std::size_t max_seq_len = 8);

/// Parameters are made trainable and perturbed away from the symmetric
/// initialization so that gradient checks see non-trivial curvature.
Checkpoint perturbed_checkpoint(const ModelConfig& config, std::uint64_t seed, double spread = 0.3);

/// Random padded batch; every row has at least `min_len` valid tokens.
TokenBatch random_batch(std::size_t batch, std::size_t seq_len, std::size_t vocab,
                        std::uint64_t seed, std::size_t min_len = 2);

struct GradCheckResult {
  double max_rel_error = 0;
  std::string worst;  // "<tensor> [index]"
  std::size_t checked = 0;
};

/// Central differences of loss() with step h against the analytic
/// gradients accumulated into each input by one backward pass.
GradCheckResult grad_check(const std::function<Tensor()>& loss, std::vector<Tensor> inputs,
                           const std::vector<std::string>& names, double h = 1e-5);

/// |a-b| / max(floor, |a|+|b|).
double relative_error(double a, double b, double floor = 1e-8);

/// Prediction matrix whose cell [pass][sample] is correct as given.
PredictionMatrix matrix_from_correctness(const std::vector<std::vector<bool>>& correct,
                                         const std::vector<Domain>& domains);

/// Dropped linear map y = w . dropout(x) sampled over many masks.
struct UnbiasednessResult {
  double deterministic = 0;
  double mc_mean = 0;
  double standard_error = 0;
  double z = 0;  // |mc_mean - deterministic| / standard_error
};
UnbiasednessResult dropout_unbiasedness(double rate, std::size_t masks, std::uint64_t seed);

/// RMS error of the M-mask MC mean of the same map, per M, and the
/// least-squares slope of log(rms) against log(M).
struct ConvergenceResult {
  std::vector<std::size_t> mask_counts;
  std::vector<double> rms_error;
  double slope = 0;
};
ConvergenceResult dropout_convergence(double rate, const std::vector<std::size_t>& mask_counts,
                                      std::size_t trials, std::uint64_t seed);

// Published per-model means transcribed for arithmetic reproduction.
struct TopRow {
  const char* model;
  double overall, memory, reasoning, std_overall, std_memory, std_reasoning;
};
struct DegradationRow {
  const char* model;
  double det_mean, det_std, base_mean, base_std, printed_degradation;
};
struct ConfigRow {
  const char* config;
  double memory, reasoning, printed_gap;
};

const std::vector<TopRow>& published_top_models();
const std::vector<DegradationRow>& published_degradations();
const std::vector<ConfigRow>& published_config_effects();

inline constexpr std::size_t kPublishedModelCount = 19;
inline constexpr std::size_t kPublishedDeterministicWins = 10;
inline constexpr std::size_t kPublishedMemoryBiased = 16;

}  // namespace mcdrop::testing
