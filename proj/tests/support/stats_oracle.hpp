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

// Direct-formula Welch test in 50-digit binary floating point.

#include <boost/math/special_functions/beta.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cstdint>
#include <random>
#include <vector>

#include "mcdrop/rng.hpp"

namespace mcdrop::testing {

using Wide = boost::multiprecision::cpp_bin_float_50;

struct WelchOracle {
  double mean_diff = 0;
  double t = 0;
  double df = 0;
  double p = 0;
  double d = 0;
};

inline WelchOracle welch_oracle(const std::vector<double>& a, const std::vector<double>& b) {
  auto moments = [](const std::vector<double>& v, Wide& mean, Wide& var) {
    mean = 0;
    for (double x : v) mean += Wide(x);
    mean /= v.size();
    var = 0;
    for (double x : v) var += (Wide(x) - mean) * (Wide(x) - mean);
    var /= (v.size() - 1);
  };
  Wide ma, va, mb, vb;
  moments(a, ma, va);
  moments(b, mb, vb);
  const Wide na = a.size(), nb = b.size();
  const Wide sa = va / na, sb = vb / nb;
  const Wide t = (ma - mb) / sqrt(sa + sb);
  const Wide df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1) + sb * sb / (nb - 1));
  // Two-sided tail: I_{df/(df+t^2)}(df/2, 1/2).
  const Wide p = boost::math::ibeta(df / 2, Wide(0.5), df / (df + t * t));
  const Wide pooled = sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2));
  WelchOracle out;
  out.mean_diff = static_cast<double>(ma - mb);
  out.t = static_cast<double>(t);
  out.df = static_cast<double>(df);
  out.p = static_cast<double>(p);
  out.d = static_cast<double>((ma - mb) / pooled);
  return out;
}

struct WelchFixture {
  std::vector<double> a, b;
};

/// Accuracy-like groups of varied size, spread and separation.
inline WelchFixture welch_fixture(std::uint64_t seed) {
  auto engine = RngStream(seed, 0x3e1c).engine();
  std::uniform_int_distribution<int> size(3, 120);
  std::uniform_real_distribution<double> centre(0.3, 0.9), spread(0.002, 0.06), shift(-0.05, 0.05);
  const double mu = centre(engine);
  std::normal_distribution<double> ga(mu, spread(engine)), gb(mu + shift(engine), spread(engine));
  WelchFixture f;
  f.a.resize(static_cast<std::size_t>(size(engine)));
  f.b.resize(static_cast<std::size_t>(size(engine)));
  for (auto& x : f.a) x = ga(engine);
  for (auto& x : f.b) x = gb(engine);
  return f;
}

}  // namespace mcdrop::testing
