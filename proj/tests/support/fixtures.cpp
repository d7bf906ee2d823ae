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

#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <random>

#include "mcdrop/ops.hpp"
#include "mcdrop/rng.hpp"

namespace mcdrop::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("mcdrop-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

ModelConfig tiny_config(Family family, std::size_t layers, std::size_t vocab,
                        std::size_t max_seq_len) {
  ModelConfig c;
  c.family = family;
  c.pooling = default_pooling(family);
  c.layers = layers;
  c.heads = 2;
  c.d_model = 8;
  c.d_ffn = 12;
  c.vocab_size = vocab;
  c.max_seq_len = max_seq_len;
  return c;
}

Checkpoint perturbed_checkpoint(const ModelConfig& config, std::uint64_t seed, double spread) {
  Checkpoint ckpt = build(config, seed);
  auto engine = RngStream(seed, 0xfeed).engine();
  std::uniform_real_distribution<double> u(-spread, spread);
  for (auto& p : ckpt.parameters) {
    p.value = p.value.detach_copy(true);
    for (auto& v : p.value.mutable_data()) v += static_cast<Real>(u(engine));
  }
  return ckpt;
}

TokenBatch random_batch(std::size_t batch, std::size_t seq_len, std::size_t vocab,
                        std::uint64_t seed, std::size_t min_len) {
  auto engine = RngStream(seed, 0xba7c).engine();
  TokenBatch b;
  b.batch = batch;
  b.seq_len = seq_len;
  b.ids.assign(batch * seq_len, 0);
  b.valid.assign(batch * seq_len, 0);
  std::uniform_int_distribution<std::size_t> len(std::min(min_len, seq_len), seq_len);
  std::uniform_int_distribution<std::int32_t> tok(1, static_cast<std::int32_t>(vocab) - 1);
  for (std::size_t r = 0; r < batch; ++r) {
    // The first row always spans the full width so no column is all padding.
    const std::size_t n = r == 0 ? seq_len : len(engine);
    for (std::size_t i = 0; i < n; ++i) {
      b.ids[r * seq_len + i] = tok(engine);
      b.valid[r * seq_len + i] = 1;
    }
  }
  return b;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max(floor, std::abs(a) + std::abs(b));
}

GradCheckResult grad_check(const std::function<Tensor()>& loss, std::vector<Tensor> inputs,
                           const std::vector<std::string>& names, double h) {
  for (auto& t : inputs) t.zero_grad();
  backward(loss());
  std::vector<std::vector<Real>> analytic;
  for (auto& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheckResult out;
  NoGradGuard no_grad;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto d = inputs[k].mutable_data();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Real original = d[i];
      d[i] = original + static_cast<Real>(h);
      const double up = loss().item();
      d[i] = original - static_cast<Real>(h);
      const double down = loss().item();
      d[i] = original;
      const double numeric = (up - down) / (2 * h);
      // Absolute floor: components whose true gradient is ~0 carry only
      // cancellation noise of order eps/h.
      const double err = relative_error(numeric, analytic[k][i], 1e-6);
      ++out.checked;
      if (err > out.max_rel_error) {
        out.max_rel_error = err;
        out.worst = names[k] + " [" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

PredictionMatrix matrix_from_correctness(const std::vector<std::vector<bool>>& correct,
                                         const std::vector<Domain>& domains) {
  PredictionMatrix pm;
  pm.passes = correct.size();
  pm.dropout = presets::baseline();
  for (std::size_t s = 0; s < domains.size(); ++s) {
    pm.samples.push_back({"s" + std::to_string(s), domains[s], s % 2 == 0});
  }
  for (const auto& row : correct) {
    for (std::size_t s = 0; s < row.size(); ++s) {
      const bool label = pm.samples[s].label;
      const bool predicted = row[s] ? label : !label;
      pm.predictions.push_back(predicted);
      pm.probabilities.push_back(predicted ? 0.75 : 0.25);
    }
  }
  return pm;
}

namespace {

constexpr std::size_t kMapWidth = 16;

struct LinearMap {
  Tensor x;
  std::vector<double> w;
  double deterministic = 0;
};

LinearMap make_map(std::uint64_t seed) {
  auto engine = RngStream(seed, 0x11a).engine();
  std::uniform_real_distribution<double> u(-1, 1);
  LinearMap m;
  std::vector<Real> xs(kMapWidth);
  for (auto& v : xs) v = static_cast<Real>(u(engine));
  m.x = Tensor({1, kMapWidth}, xs);
  for (std::size_t j = 0; j < kMapWidth; ++j) {
    m.w.push_back(u(engine));
    m.deterministic += m.w[j] * xs[j];
  }
  return m;
}

double apply_map(const LinearMap& m, double rate, const RngStream& rng) {
  const Tensor dropped = ops::dropout(m.x, static_cast<Real>(rate), rng, true);
  const auto y = dropped.data();
  double out = 0;
  for (std::size_t j = 0; j < kMapWidth; ++j) out += m.w[j] * y[j];
  return out;
}

}  // namespace

UnbiasednessResult dropout_unbiasedness(double rate, std::size_t masks, std::uint64_t seed) {
  const LinearMap m = make_map(seed);
  NoGradGuard no_grad;
  double sum = 0, sum_sq = 0;
  for (std::size_t k = 0; k < masks; ++k) {
    const double v = apply_map(m, rate, RngStream(seed, k));
    sum += v;
    sum_sq += v * v;
  }
  UnbiasednessResult r;
  const double n = static_cast<double>(masks);
  r.deterministic = m.deterministic;
  r.mc_mean = sum / n;
  const double var = (sum_sq - n * r.mc_mean * r.mc_mean) / (n - 1);
  r.standard_error = std::sqrt(var / n);
  r.z = std::abs(r.mc_mean - r.deterministic) / r.standard_error;
  return r;
}

ConvergenceResult dropout_convergence(double rate, const std::vector<std::size_t>& mask_counts,
                                      std::size_t trials, std::uint64_t seed) {
  const LinearMap m = make_map(seed);
  NoGradGuard no_grad;
  ConvergenceResult r;
  r.mask_counts = mask_counts;
  std::uint64_t stream = 0;
  for (std::size_t count : mask_counts) {
    double sq = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      double sum = 0;
      for (std::size_t k = 0; k < count; ++k) sum += apply_map(m, rate, RngStream(seed + 1, stream++));
      const double err = sum / static_cast<double>(count) - m.deterministic;
      sq += err * err;
    }
    r.rms_error.push_back(std::sqrt(sq / static_cast<double>(trials)));
  }
  double mx = 0, my = 0;
  const double n = static_cast<double>(mask_counts.size());
  for (std::size_t i = 0; i < mask_counts.size(); ++i) {
    mx += std::log(static_cast<double>(mask_counts[i])) / n;
    my += std::log(r.rms_error[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < mask_counts.size(); ++i) {
    const double dx = std::log(static_cast<double>(mask_counts[i])) - mx;
    sxy += dx * (std::log(r.rms_error[i]) - my);
    sxx += dx * dx;
  }
  r.slope = sxy / sxx;
  return r;
}

const std::vector<TopRow>& published_top_models() {
  static const std::vector<TopRow> rows{
      {"deberta-v3-small", 0.796, 0.922, 0.669, 0.0161, 0.0139, 0.0527},
      {"gpt2-medium", 0.722, 0.922, 0.523, 0.0146, 0.0139, 0.0464},
      {"scibert", 0.703, 0.870, 0.535, 0.0138, 0.0172, 0.0446},
      {"spanbert", 0.701, 0.915, 0.486, 0.0143, 0.0139, 0.0464},
      {"deberta-v3-base", 0.700, 0.938, 0.462, 0.0156, 0.0139, 0.0526},
  };
  return rows;
}

const std::vector<DegradationRow>& published_degradations() {
  static const std::vector<DegradationRow> rows{
      {"roberta-base-squad2", 0.735, 0.0000, 0.497, 0.0314, -0.238},
      {"albert-base-v2", 0.640, 0.0129, 0.489, 0.0339, -0.151},
      {"deberta-v3-base", 0.800, 0.0000, 0.700, 0.0156, -0.100},
      {"electra-base-discriminator", 0.735, 0.0000, 0.673, 0.0191, -0.062},
      {"spanbert-base-cased", 0.745, 0.0000, 0.701, 0.0143, -0.044},
  };
  return rows;
}

const std::vector<ConfigRow>& published_config_effects() {
  static const std::vector<ConfigRow> rows{
      {"deterministic", 0.804, 0.508, 0.296},   {"baseline", 0.792, 0.492, 0.301},
      {"high_attention", 0.588, 0.479, 0.110},  {"high_ffn", 0.538, 0.494, 0.044},
      {"high_both", 0.533, 0.497, 0.036},
  };
  return rows;
}

}  // namespace mcdrop::testing
