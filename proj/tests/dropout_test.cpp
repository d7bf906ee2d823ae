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
#include "mcdrop/ops.hpp"

namespace mcdrop {
namespace {

Tensor ones(std::size_t n) { return Tensor::full({1, n}, 1.0); }

TEST(Dropout, InactiveOrZeroRateIsIdentity) {
  Tensor x({1, 4}, {1, -2, 3, -4});
  for (auto y : {ops::dropout(x, 0.5, RngStream(1, 2), false), ops::dropout(x, 0.0, RngStream(1, 2), true)}) {
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(y.data()[i], x.data()[i]);
  }
}

TEST(Dropout, SurvivorsAreScaledByInverseKeepProbability) {
  const Real rate = 0.6;
  const Tensor dropped = ops::dropout(ones(1000), rate, RngStream(3, 1), true);
  const auto y = dropped.data();
  std::size_t kept = 0;
  for (auto v : y) {
    if (v != 0) {
      EXPECT_DOUBLE_EQ(v, 1.0 / (1.0 - rate));
      ++kept;
    }
  }
  // Binomial(1000, 0.4): mean 400, sd ~15.5.
  EXPECT_NEAR(static_cast<double>(kept), 400.0, 5 * 15.5);
}

TEST(Dropout, MaskIsAPureFunctionOfTheStream) {
  const auto a = ops::dropout(ones(64), 0.3, RngStream(9, 4), true);
  const auto b = ops::dropout(ones(64), 0.3, RngStream(9, 4), true);
  const auto c = ops::dropout(ones(64), 0.3, RngStream(9, 5), true);
  EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  EXPECT_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST(Dropout, RateOutsideUnitIntervalIsRejected) {
  DropoutConfig bad{"bad", 1.0, 0.1};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  DropoutConfig negative{"neg", 0.1, -0.1};
  EXPECT_THROW(negative.validate(), std::invalid_argument);
}

TEST(Dropout, PresetsMatchPublishedRates) {
  const auto& all = standard_dropout_configs();
  ASSERT_EQ(all.size(), 5u);
  const std::vector<std::tuple<std::string, double, double>> expected{
      {"deterministic", 0.0, 0.0}, {"baseline", 0.1, 0.1}, {"high_attention", 0.6, 0.1},
      {"high_ffn", 0.1, 0.6},      {"high_both", 0.6, 0.6}};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(all[i].name, std::get<0>(expected[i]));
    EXPECT_EQ(all[i].attention_rate, std::get<1>(expected[i]));
    EXPECT_EQ(all[i].ffn_rate, std::get<2>(expected[i]));
  }
}

TEST(Dropout, MonteCarloMeanOfLinearMapIsUnbiased) {
  for (double rate : {0.1, 0.6}) {
    const auto r = testing::dropout_unbiasedness(rate, 100000, 17);
    EXPECT_LT(r.z, 3.0) << "rate " << rate << " mc " << r.mc_mean << " det " << r.deterministic;
  }
}

TEST(Dropout, MonteCarloErrorShrinksAsInverseSquareRoot) {
  for (double rate : {0.1, 0.6}) {
    const auto r = testing::dropout_convergence(rate, {10, 40, 160}, 2000, 23);
    EXPECT_NEAR(r.slope, -0.5, 0.15 * 0.5) << "rate " << rate;
  }
}

}  // namespace
}  // namespace mcdrop
