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
#include <stdexcept>

#include "mcdrop/jsonl.hpp"
#include "mcdrop/ops.hpp"
#include "mcdrop/trainer.hpp"

namespace mcdrop {

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(warmup_fraction >= 0 && warmup_fraction < 1)) {
    throw std::invalid_argument("warmup_fraction must lie in [0, 1)");
  }
  if (epochs == 0 || train_batch == 0 || eval_batch == 0) {
    throw std::invalid_argument("epochs and batch sizes must be positive");
  }
  if (!(clip_norm > 0)) throw std::invalid_argument("clip_norm must be positive");
  if (weight_decay < 0) throw std::invalid_argument("weight_decay must be non-negative");
  train_dropout.validate();
}

bool decays(const std::string& name) {
  auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() &&
           std::string_view(name).substr(name.size() - suffix.size()) == suffix;
  };
  return !ends_with(".bias") && !ends_with(".gain");
}

double accuracy_from_probabilities(std::span<const Real> p_true, std::span<const int> labels) {
  if (p_true.size() != labels.size() || p_true.empty()) {
    throw std::invalid_argument("accuracy needs matching, non-empty predictions and labels");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < p_true.size(); ++i) {
    correct += static_cast<int>(predict_positive(p_true[i])) == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(p_true.size());
}

double evaluate_plain(const Checkpoint& ckpt, const TokenMatrix& data, std::size_t eval_batch) {
  if (data.rows == 0) throw std::invalid_argument("evaluate_plain on an empty sample set");
  std::vector<Real> p_true;
  p_true.reserve(data.rows);
  for (std::size_t begin = 0; begin < data.rows; begin += eval_batch) {
    const auto probs = forward(ckpt, data.batch(begin, std::min(data.rows, begin + eval_batch)),
                               presets::deterministic(), InferenceMode::kDeterministic, RngStream());
    for (const auto& p : probs) p_true.push_back(p[1]);
  }
  return accuracy_from_probabilities(p_true, data.labels);
}

TrainResult train(const Checkpoint& init, const TokenMatrix& data, const TrainConfig& config) {
  config.validate();
  if (data.rows == 0) throw std::invalid_argument("train: empty training set");

  Checkpoint ckpt = init.clone();
  std::vector<Tensor> params;
  std::vector<bool> decay_mask;
  for (auto& p : ckpt.parameters) {
    p.value = p.value.detach_copy(/*requires_grad=*/true);
    params.push_back(p.value);
    decay_mask.push_back(decays(p.name));
  }
  AdamW optimizer(params, decay_mask, config.beta1, config.beta2, config.adam_eps,
                  config.weight_decay);

  const std::size_t steps_per_epoch = (data.rows + config.train_batch - 1) / config.train_batch;
  const LinearWarmupDecay schedule(config.learning_rate, steps_per_epoch * config.epochs,
                                   config.warmup_fraction);
  const RngStream shuffle_root(config.seed, 0x73687566);
  const RngStream dropout_root(config.seed, 0x64726f70);

  TrainResult result;
  std::vector<std::size_t> order(data.rows);
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    auto engine = shuffle_root.derive(epoch).engine();
    std::shuffle(order.begin(), order.end(), engine);

    double loss_sum = 0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < data.rows; begin += config.train_batch, ++step) {
      const std::size_t end = std::min(data.rows, begin + config.train_batch);
      std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<int> labels;
      for (auto r : rows) labels.push_back(data.labels[r]);

      for (auto& p : params) p.zero_grad();
      Tensor logits = forward_logits(ckpt, data.batch(rows), config.train_dropout,
                                     /*dropout_active=*/true, dropout_root.derive(step));
      Tensor loss = ops::cross_entropy(logits, labels);
      backward(loss);
      clip_grad_norm(params, config.clip_norm);
      optimizer.step(schedule.lr(step));

      loss_sum += static_cast<double>(loss.item()) * static_cast<double>(rows.size());
      const auto ld = logits.data();
      for (std::size_t b = 0; b < rows.size(); ++b) {
        // p(true) > 0.5 exactly when logit(true) > logit(false).
        correct += static_cast<int>(ld[2 * b + 1] > ld[2 * b]) == labels[b];
      }
    }
    result.history.push_back({epoch + 1, loss_sum / static_cast<double>(data.rows),
                              static_cast<double>(correct) / static_cast<double>(data.rows)});
  }

  for (auto& p : ckpt.parameters) p.value = p.value.detach_copy(false);
  ckpt.training_seed = config.seed;
  result.checkpoint = std::move(ckpt);
  return result;
}

TrainResult train(const Checkpoint& init, const DatasetSplit& split, const TrainConfig& config) {
  if (split.train.empty()) throw std::invalid_argument("train: empty training set");
  const Vocabulary vocab = init.vocabulary.empty() ? Vocabulary::build(split.train)
                                                   : Vocabulary(init.vocabulary);
  if (vocab.size() > init.config.vocab_size) {
    throw std::invalid_argument("train: vocabulary larger than the model's embedding table");
  }
  return train(init, encode(split.train, vocab, init.config.max_seq_len), config);
}

std::string serialize_history(const std::vector<EpochRecord>& history) {
  std::string out;
  for (const auto& r : history) {
    out += jsonl_line(json{{"epoch", r.epoch}, {"loss", r.loss}, {"accuracy", r.accuracy}});
  }
  return out;
}

}  // namespace mcdrop
