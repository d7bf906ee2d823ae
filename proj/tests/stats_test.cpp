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
#include "mcdrop/stats.hpp"
#include "stats_oracle.hpp"

namespace mcdrop::stats {
namespace {

using testing::relative_error;

constexpr double kOracleTolerance = 1e-10;

SummaryRecord record(std::string model, std::string config, double overall, double std_overall,
                     std::optional<double> memory = std::nullopt,
                     std::optional<double> reasoning = std::nullopt) {
  return {std::move(model), "encoder", std::move(config),
          summary_from_means(overall, std_overall, memory, std::nullopt, reasoning, std::nullopt)};
}

TEST(Welch, MatchesExtendedPrecisionOracleOnRandomFixtures) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto f = testing::welch_fixture(seed);
    const auto oracle = testing::welch_oracle(f.a, f.b);
    const auto r = compare(f.a, f.b, 1);
    EXPECT_LT(relative_error(r.t_stat, oracle.t), kOracleTolerance) << seed;
    EXPECT_LT(relative_error(r.df, oracle.df), kOracleTolerance) << seed;
    EXPECT_LT(relative_error(r.p_raw, oracle.p, 1e-300), kOracleTolerance) << seed << " p " << oracle.p;
    EXPECT_LT(relative_error(r.cohens_d, oracle.d), kOracleTolerance) << seed;
  }
}

TEST(Welch, TwentyElementArraysFromFixedSeeds) {
  auto engine = RngStream(20, 20).engine();
  std::normal_distribution<double> a_dist(0.70, 0.02), b_dist(0.68, 0.03);
  std::vector<double> a(20), b(20);
  for (auto& x : a) x = a_dist(engine);
  for (auto& x : b) x = b_dist(engine);
  const auto oracle = testing::welch_oracle(a, b);
  const auto r = compare(a, b, 1);
  EXPECT_LT(relative_error(r.t_stat, oracle.t), kOracleTolerance);
  EXPECT_LT(relative_error(r.df, oracle.df), kOracleTolerance);
  EXPECT_LT(relative_error(r.p_raw, oracle.p), kOracleTolerance);
}

TEST(Welch, IdenticalArraysAreANullResult) {
  const std::vector<double> a{0.7, 0.72, 0.69};
  const auto r = compare(a, a, 15);
  EXPECT_EQ(r.mean_diff, 0.0);
  EXPECT_EQ(r.cohens_d, 0.0);
  EXPECT_FALSE(r.significant);
  const std::vector<double> c{0.5, 0.5, 0.5};
  const auto z = compare(c, c, 1);
  EXPECT_EQ(z.mean_diff, 0.0);
  EXPECT_EQ(z.cohens_d, 0.0);
  EXPECT_FALSE(z.significant);
  EXPECT_TRUE(z.degenerate);
}

TEST(Welch, OneConstantGroupUsesTheOtherSpread) {
  const std::vector<double> det(10, 0.735);
  const std::vector<double> mc{0.49, 0.50, 0.51, 0.48, 0.52, 0.47, 0.53, 0.50, 0.49, 0.51};
  const auto r = compare(det, mc, 15);
  EXPECT_TRUE(r.degenerate);
  double mean = 0, ss = 0;
  for (double x : mc) mean += x / 10;
  for (double x : mc) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(r.cohens_d, (0.735 - mean) / std::sqrt(ss / 9), 1e-12);
  EXPECT_GE(r.df, 9.0);
  EXPECT_LE(r.df, 18.0);
  EXPECT_TRUE(r.significant);
}

TEST(Bonferroni, FamilyOfFifteen) {
  EXPECT_DOUBLE_EQ(bonferroni_threshold(0.05, 15), 0.05 / 15);
  EXPECT_NEAR(bonferroni_adjust(0.01, 15), 0.15, 1e-15);
  EXPECT_EQ(bonferroni_adjust(0.2, 15), 1.0);
  EXPECT_NEAR(bonferroni_threshold(0.05, 3), 0.0166666666666667, 1e-15);
}

TEST(Bonferroni, SignificanceFlagUsesAdjustedThreshold) {
  // A fixture whose raw p lands between 0.05/15 and 0.05/3.
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) {
    a.push_back(0.70 + 0.01 * ((i * 7) % 11 - 5));
    b.push_back(0.70 + 0.01 * ((i * 5) % 11 - 5) - 0.0225);
  }
  const auto fifteen = compare(a, b, 15);
  const auto three = compare(a, b, 3);
  ASSERT_GT(fifteen.p_raw, 0.05 / 15);
  ASSERT_LT(fifteen.p_raw, 0.05 / 3);
  EXPECT_FALSE(fifteen.significant);
  EXPECT_TRUE(three.significant);
  EXPECT_NEAR(fifteen.p_adjusted, std::min(1.0, 15 * fifteen.p_raw), 1e-15);
}

TEST(Welch, PropertiesHoldAcrossFixtures) {
  for (std::uint64_t seed = 200; seed < 260; ++seed) {
    const auto f = testing::welch_fixture(seed);
    const auto r = compare(f.a, f.b, 15);
    EXPECT_GE(r.p_adjusted, r.p_raw);
    if (r.significant) {
      EXPECT_TRUE(compare(f.a, f.b, 1).significant);
    }
    if (r.mean_diff != 0 && r.cohens_d != 0) {
      EXPECT_EQ(std::signbit(r.mean_diff), std::signbit(r.cohens_d));
    }

    auto shifted_a = f.a, shifted_b = f.b, scaled_a = f.a, scaled_b = f.b;
    for (auto& x : shifted_a) x += 0.125;
    for (auto& x : shifted_b) x += 0.125;
    for (auto& x : scaled_a) x *= 3.0;
    for (auto& x : scaled_b) x *= 3.0;
    for (const auto& moved : {compare(shifted_a, shifted_b, 15), compare(scaled_a, scaled_b, 15)}) {
      EXPECT_LT(relative_error(moved.t_stat, r.t_stat), 1e-9) << seed;
      EXPECT_LT(relative_error(moved.p_raw, r.p_raw, 1e-300), 1e-9) << seed;
      EXPECT_LT(relative_error(moved.cohens_d, r.cohens_d), 1e-9) << seed;
    }
  }
}

TEST(Welch, RejectsTinyGroupsAndBadFamilies) {
  const std::vector<double> one{0.5}, two{0.5, 0.6};
  EXPECT_THROW(compare(one, two, 1), std::invalid_argument);
  EXPECT_THROW(compare(two, two, 0), std::invalid_argument);
}

TEST(Welch, ComparisonJsonRoundTripsInfinities) {
  const std::vector<double> a(5, 0.8), b(5, 0.5);
  const auto r = compare(a, b, 3);
  EXPECT_TRUE(std::isinf(r.t_stat));
  const auto back = comparison_from_json(comparison_to_json(r));
  EXPECT_EQ(back.t_stat, r.t_stat);
  EXPECT_EQ(back.p_raw, r.p_raw);
  EXPECT_EQ(back.family_size, 3u);
  EXPECT_EQ(back.significant, r.significant);
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_NEAR(regularized_incomplete_beta(1, 1, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(regularized_incomplete_beta(2, 3, 0.4), 0.5248, 1e-12);
  // t = 2.228138851986 is the two-sided 5% point at 10 df.
  EXPECT_NEAR(student_t_two_sided_p(2.228138851986, 10), 0.05, 1e-10);
  EXPECT_EQ(student_t_two_sided_p(0.0, 5), 1.0);
}

TEST(Degradation, PublishedRowsAndOrdering) {
  std::vector<SummaryRecord> records;
  for (const auto& row : testing::published_degradations()) {
    records.push_back(record(row.model, "deterministic", row.det_mean, row.det_std));
    records.push_back(record(row.model, "baseline", row.base_mean, row.base_std));
  }
  const auto t = degradation_table(records);
  ASSERT_EQ(t.entries.size(), 5u);
  EXPECT_EQ(t.entries.front().model_id, "roberta-base-squad2");
  EXPECT_EQ(t.entries.front().degradation, 0.497 - 0.735);
  EXPECT_NEAR(t.entries.front().degradation, -0.238, 1e-12);
  for (std::size_t i = 1; i < t.entries.size(); ++i) {
    EXPECT_LE(t.entries[i - 1].degradation, t.entries[i].degradation);
  }
  EXPECT_EQ(t.negative.count, 5u);
}

TEST(Degradation, MissingConfigurationIsSkippedWithWarning) {
  const auto t = degradation_table({record("a", "deterministic", 0.7, 0), record("a", "baseline", 0.7, 0.01),
                                    record("b", "deterministic", 0.6, 0)});
  ASSERT_EQ(t.entries.size(), 1u);
  EXPECT_EQ(t.entries[0].degradation, 0.0);
  EXPECT_EQ(t.warnings.size(), 1u);
}

TEST(CountFraction, PublishedHeadlineFractions) {
  EXPECT_NEAR(count_fraction(10, 19).fraction, 0.526, 5e-4);
  EXPECT_NEAR(count_fraction(16, 19).fraction, 0.842, 5e-4);
  EXPECT_THROW(count_fraction(3, 2), std::invalid_argument);
}

TEST(ConfigEffects, PublishedRowsAndSingleModel) {
  const auto rows = config_effect_table({record("m", "deterministic", 0.65, 0, 0.804, 0.508),
                                         record("m", "high_both", 0.5, 0.02, 0.533, 0.497)});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].gap, 0.296, 1e-12);
  EXPECT_NEAR(rows[1].gap, 0.036, 1e-12);
  EXPECT_EQ(rows[0].mean_memory, 0.804);
  EXPECT_EQ(rows[1].models, 1u);
}

TEST(ConfigEffects, CanonicalOrderThenExtrasByName) {
  const auto rows = config_effect_table({record("m", "zeta", 0.5, 0, 0.5, 0.5), record("m", "alpha", 0.5, 0, 0.5, 0.5),
                                         record("m", "baseline", 0.5, 0, 0.6, 0.4),
                                         record("m", "deterministic", 0.5, 0, 0.6, 0.4)});
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].config, "deterministic");
  EXPECT_EQ(rows[1].config, "baseline");
  EXPECT_EQ(rows[2].config, "alpha");
  EXPECT_EQ(rows[3].config, "zeta");
}

TEST(Quartiles, EightModelsGiveQuartersOfTwo) {
  std::vector<SummaryRecord> records;
  for (int i = 0; i < 8; ++i) {
    records.push_back(record("m" + std::to_string(i), "baseline", 0.6 + 0.01 * i, 0.001 * (8 - i),
                             0.7 + 0.01 * i, 0.5 + 0.005 * i));
  }
  const auto q = stability_quartiles(records);
  EXPECT_EQ(q.bottom, (std::vector<std::string>{"m7", "m6"}));
  EXPECT_EQ(q.top, (std::vector<std::string>{"m1", "m0"}));
  ASSERT_EQ(q.comparisons.size(), 3u);
  EXPECT_NEAR(q.comparisons[0].alpha_adjusted, 0.05 / 3, 1e-15);
}

TEST(Quartiles, TiesBreakByIdentifier) {
  std::vector<SummaryRecord> records;
  for (const char* id : {"d", "b", "a", "c"}) records.push_back(record(id, "baseline", 0.6, 0.01, 0.7, 0.5));
  const auto q = stability_quartiles(records);
  EXPECT_EQ(q.ranked, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_TRUE(q.comparisons.empty());
  records.pop_back();
  EXPECT_THROW(stability_quartiles(records), std::invalid_argument);
}

TEST(BiasCensus, FractionsAndMeans) {
  const auto c = memory_bias_census({record("a", "baseline", 0.5, 0, 0.8, 0.5), record("b", "baseline", 0.5, 0, 0.8, 0.5),
                                     record("c", "baseline", 0.5, 0, 0.5, 0.8)});
  EXPECT_EQ(c.positive.count, 2u);
  EXPECT_NEAR(c.mean_delta, 0.1, 1e-12);
  const auto zero = memory_bias_census({record("a", "baseline", 0.5, 0, 0.5, 0.5)});
  EXPECT_EQ(zero.positive.fraction, 0.0);
  const auto partial = memory_bias_census({record("a", "baseline", 0.5, 0, 0.7, 0.5), record("b", "baseline", 0.5, 0)});
  EXPECT_EQ(partial.positive.total, 1u);
  EXPECT_EQ(partial.warnings.size(), 1u);
}

}  // namespace
}  // namespace mcdrop::stats
