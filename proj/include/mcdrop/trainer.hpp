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
#include <span>
#include <string>
#include <vector>

#include "mcdrop/model.hpp"
#include "mcdrop/tasks.hpp"

namespace mcdrop {

struct TrainConfig {
  Real learning_rate = Real(2e-5);
  Real warmup_fraction = Real(0.10);
  std::size_t epochs = 5;
  std::size_t train_batch = 16;
  std::size_t eval_batch = 32;
  Real clip_norm = Real(1.0);
  /// Applied to every parameter except biases and norm gains.
  Real weight_decay = Real(0.01);
  DropoutConfig train_dropout = presets::baseline();
  std::uint64_t seed = 42;
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real adam_eps = Real(1e-8);

  void validate() const;
};

/// Linear warmup from 0 to `peak` over the first ceil(warmup_fraction *
/// total_steps) steps, then linear decay to 0 at total_steps.
class LinearWarmupDecay {
 public:
  LinearWarmupDecay(Real peak, std::size_t total_steps, Real warmup_fraction);

  Real lr(std::size_t step) const;
  std::size_t warmup_steps() const { return warmup_steps_; }
  std::size_t total_steps() const { return total_steps_; }

 private:
  Real peak_;
  std::size_t total_steps_;
  std::size_t warmup_steps_;
};

/// Rescales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping.
Real clip_grad_norm(std::span<Tensor> params, Real max_norm);

/// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(std::vector<Tensor> params, std::vector<bool> decay, Real beta1, Real beta2, Real eps,
        Real weight_decay);

  void step(Real lr);
  std::size_t steps_taken() const { return t_; }

 private:
  std::vector<Tensor> params_;
  std::vector<bool> decay_;
  std::vector<std::vector<Real>> m_, v_;
  Real beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
};

/// Whether a parameter receives weight decay (not a bias or norm gain).
bool decays(const std::string& parameter_name);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0;      // mean training loss over the epoch
  double accuracy = 0;  // running accuracy with training dropout active
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochRecord> history;
};

/// Fine-tunes a copy of `init`; `init` itself is left untouched.
TrainResult train(const Checkpoint& init, const TokenMatrix& data, const TrainConfig& config);
/// Encodes split.train with the checkpoint's vocabulary, then trains.
TrainResult train(const Checkpoint& init, const DatasetSplit& split, const TrainConfig& config);

/// Decision rule shared by all evaluation paths: positive iff p(true) > 0.5.
inline bool predict_positive(Real p_true) { return p_true > Real(0.5); }

double accuracy_from_probabilities(std::span<const Real> p_true, std::span<const int> labels);

/// One deterministic pass; fraction of samples whose prediction matches.
double evaluate_plain(const Checkpoint& ckpt, const TokenMatrix& data, std::size_t eval_batch = 32);

std::string serialize_history(const std::vector<EpochRecord>& history);

}  // namespace mcdrop
