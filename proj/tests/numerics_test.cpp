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
#include <random>

#include "fixtures.hpp"
#include "op_cases.hpp"
#include "mcdrop/ops.hpp"
#include "mcdrop/rng.hpp"

namespace mcdrop {
namespace {

using testing::grad_check;
using testing::random_tensor;

constexpr double kStep = 1e-5;
constexpr double kMaxRelError = 1e-4;

TEST(GradientCheck, EveryOpOnFiftyRandomFixtures) {
  for (const auto& c : testing::op_cases()) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      auto [inputs, loss] = c.make(seed * 101);
      std::vector<std::string> names(inputs.size(), c.name);
      const auto r = grad_check(loss, inputs, names, kStep);
      EXPECT_LT(r.max_rel_error, kMaxRelError) << c.name << " seed " << seed << " at " << r.worst;
    }
  }
}

TEST(GradientCheck, TwoLayerModelBothFamilies) {
  for (std::uint64_t seed = 11; seed < 17; ++seed) {
    for (Family family : {Family::kEncoder, Family::kDecoder}) {
      const auto r = testing::model_grad_check(family, seed, kStep);
      EXPECT_LT(r.max_rel_error, kMaxRelError) << to_string(family) << " seed " << seed << " at " << r.worst;
      EXPECT_EQ(r.checked, testing::perturbed_checkpoint(testing::tiny_config(family, 2), seed).parameter_count());
    }
  }
}

TEST(GradientCheck, MeanPoolingHead) {
  auto config = testing::tiny_config(Family::kEncoder, 1);
  config.pooling = Pooling::kMean;
  const auto ckpt = testing::perturbed_checkpoint(config, 12);
  const auto batch = testing::random_batch(2, 5, config.vocab_size, 6);
  std::vector<Tensor> params;
  std::vector<std::string> names;
  for (const auto& p : ckpt.parameters) {
    params.push_back(p.value);
    names.push_back(p.name);
  }
  auto loss = [&] {
    return ops::cross_entropy(
        forward_logits(ckpt, batch, presets::deterministic(), false, RngStream()), std::vector<int>{0, 1});
  };
  EXPECT_LT(grad_check(loss, params, names, kStep).max_rel_error, kMaxRelError);
}

TEST(Tensor, GradientsAccumulateUntilZeroed) {
  Tensor x({2}, {1.0, 2.0}, true);
  backward(ops::sum(ops::mul(x, x)));
  backward(ops::sum(ops::mul(x, x)));
  EXPECT_DOUBLE_EQ(x.grad()[0], 4.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], 8.0);
  x.zero_grad();
  EXPECT_DOUBLE_EQ(x.grad()[0], 0.0);
}

TEST(Tensor, NoGradGuardRecordsNothing) {
  Tensor x({2}, {1.0, 2.0}, true);
  Tensor y;
  {
    NoGradGuard guard;
    EXPECT_FALSE(grad_enabled());
    y = ops::scale(x, 2.0);
  }
  EXPECT_TRUE(grad_enabled());
  EXPECT_FALSE(y.requires_grad());
}

TEST(Tensor, ShapeMismatchThrows) {
  Tensor a = Tensor::zeros({2, 3});
  Tensor b = Tensor::zeros({2, 3});
  EXPECT_THROW(ops::matmul(a, b), std::invalid_argument);
  EXPECT_THROW(ops::add(a, Tensor::zeros({3, 2})), std::invalid_argument);
}

TEST(Ops, SoftmaxRowsSumToOneAndMaskedEntriesAreExactZeros) {
  Tensor scores = random_tensor({2, 3, 3}, 3, -5, 5).detach_copy();
  Tensor p = ops::softmax(ops::causal_mask(scores));
  const auto d = p.data();
  for (std::size_t r = 0; r < 6; ++r) {
    double total = 0;
    for (std::size_t c = 0; c < 3; ++c) total += d[r * 3 + c];
    EXPECT_NEAR(total, 1.0, 1e-12);
    const std::size_t query = r % 3;
    for (std::size_t c = query + 1; c < 3; ++c) EXPECT_EQ(d[r * 3 + c], 0.0);
  }
}

TEST(Ops, GeluMatchesErfDefinition) {
  Tensor x({3}, {-1.5, 0.0, 2.0});
  const Tensor out = ops::gelu(x);
  const auto y = out.data();
  for (std::size_t i = 0; i < 3; ++i) {
    const double v = x.data()[i];
    EXPECT_NEAR(y[i], 0.5 * v * (1 + std::erf(v / std::sqrt(2.0))), 1e-15);
  }
}

TEST(Rng, StreamsAreAddressable) {
  const RngStream a(42, 7);
  auto e1 = a.engine();
  auto e2 = RngStream(42, 7).engine();
  EXPECT_EQ(e1(), e2());
  EXPECT_NE(a.derive(1).engine()(), a.derive(2).engine()());
  EXPECT_NE(RngStream(42, 7).engine()(), RngStream(42, 8).engine()());
  EXPECT_EQ(a.derive(3), a.derive(3));
}

}  // namespace
}  // namespace mcdrop
