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

#include <cmath>
#include <stdexcept>

#include "mcdrop/trainer.hpp"

namespace mcdrop {

LinearWarmupDecay::LinearWarmupDecay(Real peak, std::size_t total_steps, Real warmup_fraction)
    : peak_(peak), total_steps_(total_steps) {
  if (total_steps == 0) throw std::invalid_argument("schedule needs at least one step");
  if (!(warmup_fraction >= 0 && warmup_fraction < 1)) {
    throw std::invalid_argument("warmup_fraction must lie in [0, 1)");
  }
  warmup_steps_ = static_cast<std::size_t>(
      std::ceil(static_cast<double>(warmup_fraction) * static_cast<double>(total_steps) - 1e-9));
}

Real LinearWarmupDecay::lr(std::size_t step) const {
  if (step < warmup_steps_) {
    return peak_ * static_cast<Real>(step) / static_cast<Real>(warmup_steps_);
  }
  if (step >= total_steps_) return Real(0);
  return peak_ * static_cast<Real>(total_steps_ - step) /
         static_cast<Real>(total_steps_ - warmup_steps_);
}

Real clip_grad_norm(std::span<Tensor> params, Real max_norm) {
  double sq = 0;
  for (auto& p : params) {
    for (auto g : p.grad()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0) {
    const Real factor = static_cast<Real>(max_norm / norm);
    for (auto& p : params) {
      for (auto& g : p.mutable_grad()) g *= factor;
    }
  }
  return static_cast<Real>(norm);
}

AdamW::AdamW(std::vector<Tensor> params, std::vector<bool> decay, Real beta1, Real beta2, Real eps,
             Real weight_decay)
    : params_(std::move(params)),
      decay_(std::move(decay)),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps),
      weight_decay_(weight_decay) {
  if (decay_.size() != params_.size()) throw std::invalid_argument("decay mask size mismatch");
  for (const auto& p : params_) {
    m_.emplace_back(p.numel(), Real(0));
    v_.emplace_back(p.numel(), Real(0));
  }
}

void AdamW::step(Real lr) {
  ++t_;
  const Real bias1 = Real(1) - std::pow(beta1_, static_cast<Real>(t_));
  const Real bias2 = Real(1) - std::pow(beta2_, static_cast<Real>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto w = params_[i].mutable_data();
    const auto g = params_[i].grad();
    auto& m = m_[i];
    auto& v = v_[i];
    const Real decay = decay_[i] ? lr * weight_decay_ : Real(0);
    for (std::size_t j = 0; j < w.size(); ++j) {
      w[j] -= decay * w[j];
      m[j] = beta1_ * m[j] + (Real(1) - beta1_) * g[j];
      v[j] = beta2_ * v[j] + (Real(1) - beta2_) * g[j] * g[j];
      w[j] -= lr * (m[j] / bias1) / (std::sqrt(v[j] / bias2) + eps_);
    }
  }
}

}  // namespace mcdrop
