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

#include "mcdrop/mc_eval.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "mcdrop/trainer.hpp"

namespace mcdrop {

std::vector<std::string> PredictionMatrix::check_invariants() const {
  std::vector<std::string> issues;
  const std::size_t n = samples.size();
  if (passes == 0) issues.push_back("matrix has no passes");
  if (n == 0) issues.push_back("matrix has no samples");
  if (predictions.size() != passes * n || probabilities.size() != passes * n) {
    issues.push_back("matrix buffers do not match passes x samples");
    return issues;
  }
  for (std::size_t m = 0; m < passes; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = probability(m, i);
      if (!(p >= 0.0 && p <= 1.0)) {
        issues.push_back("pass " + std::to_string(m) + " sample " + samples[i].id +
                         ": probability outside [0, 1]");
      } else if (prediction(m, i) != predict_positive(static_cast<Real>(p))) {
        issues.push_back("pass " + std::to_string(m) + " sample " + samples[i].id +
                         ": prediction disagrees with probability");
      }
    }
  }
  if (mode == InferenceMode::kDeterministic) {
    for (std::size_t m = 1; m < passes; ++m) {
      if (!std::equal(probabilities.begin(), probabilities.begin() + static_cast<std::ptrdiff_t>(n),
                      probabilities.begin() + static_cast<std::ptrdiff_t>(m * n))) {
        issues.push_back("deterministic matrix: pass " + std::to_string(m) + " differs from pass 0");
      }
    }
  }
  return issues;
}

PredictionMatrix mc_run(const Checkpoint& ckpt, const std::vector<Sample>& test,
                        const DropoutConfig& dropout, std::size_t passes,
                        std::uint64_t base_seed, InferenceMode mode, std::size_t eval_batch) {
  if (passes == 0) throw std::invalid_argument("mc_run: passes must be at least 1");
  if (test.empty()) throw std::invalid_argument("mc_run: empty test set");
  if (eval_batch == 0) throw std::invalid_argument("mc_run: eval_batch must be positive");
  dropout.validate();

  const Vocabulary vocab(ckpt.vocabulary);
  const TokenMatrix data = encode(test, vocab, ckpt.config.max_seq_len);

  PredictionMatrix pm;
  pm.passes = passes;
  pm.dropout = dropout;
  pm.mode = mode;
  pm.base_seed = base_seed;
  pm.eval_batch = eval_batch;
  pm.checkpoint_digest = checkpoint_digest(ckpt);
  for (const auto& s : test) pm.samples.push_back({s.id, s.domain, s.label});

  const std::size_t n = test.size();
  pm.predictions.resize(passes * n);
  pm.probabilities.resize(passes * n);
  std::vector<TokenBatch> batches;
  for (std::size_t begin = 0; begin < n; begin += eval_batch) {
    batches.push_back(data.batch(begin, std::min(n, begin + eval_batch)));
  }
  for (std::size_t m = 0; m < passes; ++m) {
    const RngStream pass_rng(base_seed, m);
    std::size_t offset = m * n;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      for (const auto& p : forward(ckpt, batches[b], dropout, mode, pass_rng.derive(b))) {
        pm.probabilities[offset] = static_cast<double>(p[1]);
        pm.predictions[offset] = predict_positive(p[1]) ? 1 : 0;
        ++offset;
      }
    }
  }
  return pm;
}

RunAccuracies run_level_accuracy(const PredictionMatrix& pm) {
  const std::size_t n = pm.sample_count();
  if (pm.passes == 0 || n == 0 || pm.predictions.size() != pm.passes * n) {
    throw std::invalid_argument("run_level_accuracy: malformed prediction matrix");
  }
  std::size_t n_mem = 0, n_rea = 0;
  for (const auto& s : pm.samples) (s.domain == Domain::kMemory ? n_mem : n_rea)++;

  RunAccuracies acc;
  for (std::size_t m = 0; m < pm.passes; ++m) {
    std::size_t correct = 0, c_mem = 0, c_rea = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool hit = pm.prediction(m, i) == pm.samples[i].label;
      correct += hit;
      (pm.samples[i].domain == Domain::kMemory ? c_mem : c_rea) += hit;
    }
    acc.overall.push_back(static_cast<double>(correct) / static_cast<double>(n));
    if (n_mem) acc.memory.push_back(static_cast<double>(c_mem) / static_cast<double>(n_mem));
    if (n_rea) acc.reasoning.push_back(static_cast<double>(c_rea) / static_cast<double>(n_rea));
  }
  return acc;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sequence");
  // Shifted by the first value: a constant sequence yields that value exactly.
  const double origin = values.front();
  double total = 0;
  for (double v : values) total += v - origin;
  return origin + total / static_cast<double>(values.size());
}

double population_std(const std::vector<double>& values) {
  const double mu = mean_of(values);
  double ss = 0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

RunSummary summarize(const RunAccuracies& acc) {
  RunSummary s;
  s.mean_overall = mean_of(acc.overall);
  s.std_overall = population_std(acc.overall);
  if (!acc.memory.empty()) {
    s.mean_memory = mean_of(acc.memory);
    s.std_memory = population_std(acc.memory);
  }
  if (!acc.reasoning.empty()) {
    s.mean_reasoning = mean_of(acc.reasoning);
    s.std_reasoning = population_std(acc.reasoning);
  }
  if (s.mean_memory && s.mean_reasoning) {
    s.delta_cog = memory_reasoning_differential(*s.mean_memory, *s.mean_reasoning);
  }
  return s;
}

RunSummary summarize(const PredictionMatrix& pm) { return summarize(run_level_accuracy(pm)); }

RunSummary summary_from_means(double mean_overall, double std_overall,
                              std::optional<double> mean_memory, std::optional<double> std_memory,
                              std::optional<double> mean_reasoning,
                              std::optional<double> std_reasoning) {
  RunSummary s{mean_overall, std_overall, mean_memory, std_memory, mean_reasoning, std_reasoning,
               std::nullopt};
  if (mean_memory && mean_reasoning) {
    s.delta_cog = memory_reasoning_differential(*mean_memory, *mean_reasoning);
  }
  return s;
}

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

VerifyReport verify_matrix(const PredictionMatrix& stored, const Checkpoint& ckpt,
                           const std::vector<Sample>& test) {
  VerifyReport report;
  report.warnings = stored.check_invariants();
  report.digest_matches = checkpoint_digest(ckpt) == stored.checkpoint_digest;
  report.samples_match = test.size() == stored.samples.size();
  for (std::size_t i = 0; report.samples_match && i < test.size(); ++i) {
    report.samples_match = SampleMeta{test[i].id, test[i].domain, test[i].label} == stored.samples[i];
  }
  if (!report.samples_match || stored.passes == 0) return report;

  const PredictionMatrix replay = mc_run(ckpt, test, stored.dropout, stored.passes,
                                         stored.base_seed, stored.mode, stored.eval_batch);
  const std::size_t n = stored.sample_count();
  if (stored.predictions.size() != replay.predictions.size() ||
      stored.probabilities.size() != replay.probabilities.size()) {
    report.warnings.push_back("stored matrix buffers have the wrong size");
    return report;
  }
  for (std::size_t m = 0; m < stored.passes; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (stored.prediction(m, i) != replay.prediction(m, i)) {
        report.mismatches.push_back({m, i, stored.samples[i].id, "prediction"});
      }
      if (!same_bits(stored.probability(m, i), replay.probability(m, i))) {
        report.mismatches.push_back({m, i, stored.samples[i].id, "probability"});
      }
    }
  }
  report.ok = report.digest_matches && report.mismatches.empty();
  return report;
}

}  // namespace mcdrop
