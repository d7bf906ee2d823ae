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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcdrop/stats.hpp"

namespace mcdrop::stats {

namespace {

// Continued fraction for I_x(a, b) (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

double sample_variance(std::span<const double> v, double mean) {
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

double mean_span(std::span<const double> v) {
  const double origin = v.front();
  double total = 0;
  for (double x : v) total += x - origin;
  return origin + total / static_cast<double>(v.size());
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0 && b > 0)) throw std::invalid_argument("incomplete beta needs a, b > 0");
  if (!(x >= 0 && x <= 1)) throw std::invalid_argument("incomplete beta needs x in [0, 1]");
  if (x == 0.0 || x == 1.0) return x;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0)) throw std::invalid_argument("t distribution needs df > 0");
  if (std::isnan(t)) throw std::invalid_argument("t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * df, 0.5, df / (df + t * t));
}

double bonferroni_adjust(double p_raw, std::size_t family_size) {
  return std::min(1.0, static_cast<double>(family_size) * p_raw);
}

ComparisonResult compare(std::span<const double> a, std::span<const double> b,
                         std::size_t family_size, double alpha, std::string label_a,
                         std::string label_b) {
  if (a.size() < 2 || b.size() < 2) {
    throw std::invalid_argument("compare needs at least two values per group");
  }
  if (family_size == 0) throw std::invalid_argument("family_size must be at least 1");
  if (!(alpha > 0 && alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");

  ComparisonResult r;
  r.label_a = std::move(label_a);
  r.label_b = std::move(label_b);
  r.alpha = alpha;
  r.family_size = family_size;
  r.alpha_adjusted = bonferroni_threshold(alpha, family_size);

  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean_span(a), mb = mean_span(b);
  const double va = sample_variance(a, ma), vb = sample_variance(b, mb);
  r.mean_diff = ma - mb;
  const double sa = va / na, sb = vb / nb;
  const double se2 = sa + sb;

  if (va == 0.0 || vb == 0.0) r.degenerate = true;

  if (se2 == 0.0) {
    r.df = na + nb - 2.0;
    if (r.mean_diff == 0.0) {
      r.mean_diff = 0.0;
      r.t_stat = 0.0;
      r.p_raw = 1.0;
      r.cohens_d = 0.0;
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      r.t_stat = r.mean_diff > 0 ? inf : -inf;
      r.p_raw = 0.0;
      r.cohens_d = r.t_stat;
    }
  } else {
    r.t_stat = r.mean_diff / std::sqrt(se2);
    r.df = se2 * se2 / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    if (r.degenerate) r.df = std::clamp(r.df, std::min(na, nb) - 1.0, na + nb - 2.0);
    r.p_raw = student_t_two_sided_p(r.t_stat, r.df);
    double spread;
    if (va == 0.0) {
      spread = std::sqrt(vb);
    } else if (vb == 0.0) {
      spread = std::sqrt(va);
    } else {
      spread = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
    }
    r.cohens_d = r.mean_diff / spread;
  }
  r.p_adjusted = bonferroni_adjust(r.p_raw, family_size);
  r.significant = r.p_raw < r.alpha_adjusted;
  return r;
}

json comparison_to_json(const ComparisonResult& r) {
  return {{"record", "comparison"},
          {"label_a", r.label_a},
          {"label_b", r.label_b},
          {"mean_diff", real_to_json(r.mean_diff)},
          {"t_stat", real_to_json(r.t_stat)},
          {"df", real_to_json(r.df)},
          {"p_raw", real_to_json(r.p_raw)},
          {"p_adjusted", real_to_json(r.p_adjusted)},
          {"alpha", r.alpha},
          {"alpha_adjusted", r.alpha_adjusted},
          {"family_size", r.family_size},
          {"cohens_d", real_to_json(r.cohens_d)},
          {"significant", r.significant},
          {"degenerate", r.degenerate}};
}

ComparisonResult comparison_from_json(const json& j) {
  ComparisonResult r;
  r.label_a = j.at("label_a").get<std::string>();
  r.label_b = j.at("label_b").get<std::string>();
  r.mean_diff = real_from_json(j.at("mean_diff"));
  r.t_stat = real_from_json(j.at("t_stat"));
  r.df = real_from_json(j.at("df"));
  r.p_raw = real_from_json(j.at("p_raw"));
  r.p_adjusted = real_from_json(j.at("p_adjusted"));
  r.alpha = j.at("alpha").get<double>();
  r.alpha_adjusted = j.at("alpha_adjusted").get<double>();
  r.family_size = j.at("family_size").get<std::size_t>();
  r.cohens_d = real_from_json(j.at("cohens_d"));
  r.significant = j.at("significant").get<bool>();
  r.degenerate = j.at("degenerate").get<bool>();
  return r;
}

}  // namespace mcdrop::stats
