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

#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "mcdrop/mc_eval.hpp"

namespace mcdrop {
namespace {

using testing::matrix_from_correctness;

struct Fixture {
  Checkpoint ckpt;
  std::vector<Sample> test;
};

Fixture small_model() {
  Fixture f;
  const auto data = split(generate_corpus(20, 4), 0.8, 42);
  const auto vocab = Vocabulary::build(data.train);
  auto c = testing::tiny_config(Family::kEncoder, 2, vocab.size(), 48);
  f.ckpt = testing::perturbed_checkpoint(c, 3, 0.2);
  for (auto& p : f.ckpt.parameters) p.value = p.value.detach_copy(false);
  f.ckpt.vocabulary = vocab.tokens();
  f.test = data.test;
  return f;
}

TEST(RunLevelAccuracy, HandFixture) {
  const auto pm = matrix_from_correctness({{true, true, false}, {true, false, false}},
                                          {Domain::kMemory, Domain::kMemory, Domain::kReasoning});
  const auto acc = run_level_accuracy(pm);
  ASSERT_EQ(acc.overall.size(), 2u);
  EXPECT_DOUBLE_EQ(acc.overall[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(acc.overall[1], 1.0 / 3.0);
  EXPECT_EQ(acc.memory, (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(acc.reasoning, (std::vector<double>{0.0, 0.0}));
}

TEST(Summary, PopulationStdDividesByPassCount) {
  EXPECT_DOUBLE_EQ(population_std({2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0}), 2.0);
  EXPECT_EQ(population_std({0.7, 0.7, 0.7}), 0.0);
  EXPECT_DOUBLE_EQ(mean_of({1.0, 2.0}), 1.5);
}

TEST(Summary, DeltaCogIsMemoryMinusReasoning) {
  const auto pm = matrix_from_correctness({{true, true, false, true}, {true, false, true, true}},
                                          {Domain::kMemory, Domain::kMemory, Domain::kReasoning,
                                           Domain::kReasoning});
  const auto s = summarize(pm);
  ASSERT_TRUE(s.delta_cog.has_value());
  EXPECT_DOUBLE_EQ(*s.mean_memory, 0.75);
  EXPECT_DOUBLE_EQ(*s.mean_reasoning, 0.75);
  EXPECT_DOUBLE_EQ(*s.delta_cog, 0.0);
  EXPECT_DOUBLE_EQ(s.std_overall, 0.0);
  EXPECT_DOUBLE_EQ(*s.std_memory, 0.25);
}

TEST(Summary, SingleDomainIsPartial) {
  const auto s = summarize(matrix_from_correctness({{true}, {false}}, {Domain::kReasoning}));
  EXPECT_TRUE(s.partial());
  EXPECT_FALSE(s.mean_memory.has_value());
  EXPECT_DOUBLE_EQ(*s.mean_reasoning, 0.5);
}

TEST(Summary, FromPublishedMeans) {
  const auto s = summary_from_means(0.796, 0.0161, 0.922, 0.0139, 0.669, 0.0527);
  EXPECT_NEAR(*s.delta_cog, 0.253, 1e-12);
  EXPECT_TRUE(summary_from_means(0.5, 0.1, 0.5).partial());
}

TEST(Summary, JsonRoundTrip) {
  SummaryRecord r{"m1", "encoder", "baseline", summary_from_means(0.7, 0.01, 0.8, 0.02, 0.6, 0.03)};
  const auto back = summary_from_json(summary_to_json(r));
  EXPECT_EQ(back.model_id, "m1");
  EXPECT_EQ(back.summary.delta_cog, r.summary.delta_cog);
  const auto many = parse_summaries(serialize_summaries({r, r}));
  EXPECT_EQ(many.size(), 2u);
}

TEST(McRun, DeterministicPresetHasExactlyZeroStd) {
  const auto f = small_model();
  const auto pm = mc_run(f.ckpt, f.test, presets::deterministic(), 100, 5);
  const auto s = summarize(pm);
  EXPECT_EQ(s.std_overall, 0.0);
  EXPECT_EQ(*s.std_memory, 0.0);
  EXPECT_EQ(*s.std_reasoning, 0.0);
  EXPECT_TRUE(pm.check_invariants().empty());
}

TEST(McRun, ReplayIsBitwiseAndPassesAreAddressable) {
  const auto f = small_model();
  const auto a = mc_run(f.ckpt, f.test, presets::high_both(), 6, 77);
  const auto b = mc_run(f.ckpt, f.test, presets::high_both(), 6, 77);
  EXPECT_EQ(a.probabilities, b.probabilities);
  EXPECT_EQ(a.predictions, b.predictions);
  // The first k passes of a longer run are the k-pass run.
  const auto prefix = mc_run(f.ckpt, f.test, presets::high_both(), 3, 77);
  EXPECT_TRUE(std::equal(prefix.probabilities.begin(), prefix.probabilities.end(), a.probabilities.begin()));
  const auto other = mc_run(f.ckpt, f.test, presets::high_both(), 6, 78);
  EXPECT_NE(a.probabilities, other.probabilities);
  EXPECT_EQ(a.checkpoint_digest, checkpoint_digest(f.ckpt));
}

TEST(McRun, RejectsBadArguments) {
  const auto f = small_model();
  EXPECT_THROW(mc_run(f.ckpt, f.test, presets::baseline(), 0), std::invalid_argument);
  EXPECT_THROW(mc_run(f.ckpt, {}, presets::baseline(), 2), std::invalid_argument);
}

TEST(MatrixIo, RoundTripAndVerify) {
  const auto f = small_model();
  const auto pm = mc_run(f.ckpt, f.test, presets::baseline(), 4, 9);
  testing::TempDir dir("matrix");
  save_prediction_matrix(pm, dir.path() / "m.jsonl");
  const auto parsed = load_prediction_matrix(dir.path() / "m.jsonl");
  EXPECT_TRUE(parsed.warnings.empty());
  EXPECT_EQ(parsed.matrix.probabilities, pm.probabilities);
  EXPECT_EQ(parsed.matrix.samples, pm.samples);
  EXPECT_EQ(parsed.matrix.dropout, pm.dropout);
  EXPECT_EQ(serialize_prediction_matrix(parsed.matrix), serialize_prediction_matrix(pm));
  const auto report = verify_matrix(parsed.matrix, f.ckpt, f.test);
  EXPECT_TRUE(report.ok);
  EXPECT_TRUE(report.digest_matches);
}

TEST(MatrixIo, FlippedCellIsReported) {
  const auto f = small_model();
  auto pm = mc_run(f.ckpt, f.test, presets::baseline(), 3, 9);
  pm.predictions[pm.sample_count() + 2] ^= 1;
  const auto report = verify_matrix(pm, f.ckpt, f.test);
  EXPECT_FALSE(report.ok);
  ASSERT_FALSE(report.mismatches.empty());
  EXPECT_EQ(report.mismatches[0].pass, 1u);
  EXPECT_EQ(report.mismatches[0].sample, 2u);
  EXPECT_EQ(report.mismatches[0].field, "prediction");
  // The flipped prediction also disagrees with its own probability.
  EXPECT_FALSE(pm.check_invariants().empty());
}

TEST(MatrixIo, StructuralDamageThrows) {
  const auto f = small_model();
  const auto text = serialize_prediction_matrix(mc_run(f.ckpt, f.test, presets::baseline(), 2, 1));
  EXPECT_ANY_THROW(parse_prediction_matrix(text.substr(0, text.size() / 2) + "{broken\n"));
  EXPECT_ANY_THROW(parse_prediction_matrix(""));
}

}  // namespace
}  // namespace mcdrop
