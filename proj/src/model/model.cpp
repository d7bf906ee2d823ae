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

#include "mcdrop/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "mcdrop/ops.hpp"

namespace mcdrop {

void DropoutConfig::validate() const {
  auto check = [this](Real rate, const char* site) {
    if (!(rate >= Real(0) && rate < Real(1))) {
      throw std::invalid_argument("dropout config '" + name + "': " + site +
                                  " rate must lie in [0, 1)");
    }
  };
  check(attention_rate, "attention");
  check(ffn_rate, "ffn");
}

namespace presets {
DropoutConfig deterministic() { return {"deterministic", Real(0.0), Real(0.0)}; }
DropoutConfig baseline() { return {"baseline", Real(0.1), Real(0.1)}; }
DropoutConfig high_attention() { return {"high_attention", Real(0.6), Real(0.1)}; }
DropoutConfig high_ffn() { return {"high_ffn", Real(0.1), Real(0.6)}; }
DropoutConfig high_both() { return {"high_both", Real(0.6), Real(0.6)}; }
}  // namespace presets

const std::vector<DropoutConfig>& standard_dropout_configs() {
  static const std::vector<DropoutConfig> configs{
      presets::deterministic(), presets::baseline(), presets::high_attention(),
      presets::high_ffn(), presets::high_both()};
  return configs;
}

std::optional<DropoutConfig> find_dropout_preset(std::string_view name) {
  for (const auto& c : standard_dropout_configs()) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

std::string to_string(Family family) {
  return family == Family::kEncoder ? "encoder" : "decoder";
}

std::string to_string(Pooling pooling) {
  switch (pooling) {
    case Pooling::kCls: return "cls";
    case Pooling::kMean: return "mean";
    case Pooling::kLastToken: return "last_token";
  }
  return "cls";
}

Family family_from_string(std::string_view s) {
  if (s == "encoder") return Family::kEncoder;
  if (s == "decoder") return Family::kDecoder;
  throw std::invalid_argument("unknown model family '" + std::string(s) + "'");
}

Pooling pooling_from_string(std::string_view s) {
  if (s == "cls") return Pooling::kCls;
  if (s == "mean") return Pooling::kMean;
  if (s == "last_token") return Pooling::kLastToken;
  throw std::invalid_argument("unknown pooling '" + std::string(s) + "'");
}

Pooling default_pooling(Family family) {
  return family == Family::kEncoder ? Pooling::kCls : Pooling::kLastToken;
}

std::string to_string(InferenceMode mode) {
  return mode == InferenceMode::kDeterministic ? "deterministic" : "stochastic";
}

InferenceMode inference_mode_from_string(std::string_view s) {
  if (s == "deterministic") return InferenceMode::kDeterministic;
  if (s == "stochastic") return InferenceMode::kStochastic;
  throw std::invalid_argument("unknown inference mode '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (layers == 0 || heads == 0 || d_model == 0 || d_ffn == 0 || vocab_size == 0 ||
      max_seq_len == 0) {
    throw std::invalid_argument("model config extents must be positive");
  }
  if (d_model % heads != 0) {
    throw std::invalid_argument("d_model (" + std::to_string(d_model) +
                                ") must be divisible by heads (" + std::to_string(heads) + ")");
  }
}

std::vector<std::pair<std::string, Shape>> parameter_layout(const ModelConfig& c) {
  const std::size_t d = c.d_model, f = c.d_ffn;
  std::vector<std::pair<std::string, Shape>> layout;
  layout.emplace_back("embeddings.token", Shape{c.vocab_size, d});
  layout.emplace_back("embeddings.position", Shape{c.max_seq_len, d});
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    layout.emplace_back(p + "attn_norm.gain", Shape{d});
    layout.emplace_back(p + "attn_norm.bias", Shape{d});
    for (const char* proj : {"query", "key", "value", "output"}) {
      layout.emplace_back(p + "attention." + proj + ".weight", Shape{d, d});
      layout.emplace_back(p + "attention." + proj + ".bias", Shape{d});
    }
    layout.emplace_back(p + "ffn_norm.gain", Shape{d});
    layout.emplace_back(p + "ffn_norm.bias", Shape{d});
    layout.emplace_back(p + "ffn.up.weight", Shape{d, f});
    layout.emplace_back(p + "ffn.up.bias", Shape{f});
    layout.emplace_back(p + "ffn.down.weight", Shape{f, d});
    layout.emplace_back(p + "ffn.down.bias", Shape{d});
  }
  layout.emplace_back("final_norm.gain", Shape{d});
  layout.emplace_back("final_norm.bias", Shape{d});
  layout.emplace_back("classifier.weight", Shape{d, 2});
  layout.emplace_back("classifier.bias", Shape{2});
  return layout;
}

const Tensor& Checkpoint::param(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p.value;
  }
  throw std::out_of_range("no parameter named '" + std::string(name) + "'");
}

Tensor& Checkpoint::param(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).param(name));
}

std::size_t Checkpoint::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters) n += p.value.numel();
  return n;
}

Checkpoint Checkpoint::clone() const {
  Checkpoint out = *this;
  for (auto& p : out.parameters) p.value = p.value.detach_copy(p.value.requires_grad());
  return out;
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

Checkpoint build(const ModelConfig& config, std::uint64_t init_seed) {
  config.validate();
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.training_seed = init_seed;
  std::mt19937_64 engine = RngStream(init_seed, 0).engine();
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kInitStd = 0.02;
  for (auto& [name, shape] : parameter_layout(config)) {
    std::vector<Real> values(shape_numel(shape));
    if (ends_with(name, ".gain")) {
      std::fill(values.begin(), values.end(), Real(1));
    } else if (ends_with(name, ".bias")) {
      std::fill(values.begin(), values.end(), Real(0));
    } else {
      for (auto& v : values) {
        double z;
        do {
          z = normal(engine);
        } while (std::abs(z) > 2.0);
        v = static_cast<Real>(kInitStd * z);
      }
    }
    ckpt.parameters.push_back({name, Tensor(shape, std::move(values))});
  }
  return ckpt;
}

void TokenBatch::validate() const {
  if (batch == 0 || seq_len == 0) throw std::invalid_argument("empty token batch");
  if (ids.size() != batch * seq_len || valid.size() != ids.size()) {
    throw std::invalid_argument("token batch buffers do not match batch x seq_len");
  }
  for (std::size_t b = 0; b < batch; ++b) {
    if (!valid[b * seq_len]) throw std::invalid_argument("sequence with no leading token");
  }
}

namespace {

enum Site : std::uint64_t { kAttentionSite = 0, kFfnSite = 1 };

Tensor attention_block(const Checkpoint& ckpt, const std::string& p, const Tensor& x,
                       const TokenBatch& batch, Real rate, bool active, const RngStream& rng) {
  const auto& c = ckpt.config;
  const std::size_t b = batch.batch, t = batch.seq_len, h = c.heads;
  auto project = [&](const char* name) {
    return ops::add_bias(ops::matmul(x, ckpt.param(p + "attention." + name + ".weight")),
                         ckpt.param(p + "attention." + name + ".bias"));
  };
  Tensor q = ops::split_heads(project("query"), b, t, h);
  Tensor k = ops::split_heads(project("key"), b, t, h);
  Tensor v = ops::split_heads(project("value"), b, t, h);
  const Real inv_sqrt_dh = Real(1) / std::sqrt(static_cast<Real>(c.d_model / h));
  Tensor scores = ops::scale(ops::bmm(q, k, /*transpose_b=*/true), inv_sqrt_dh);
  scores = ops::key_padding_mask(scores, batch.valid, h);
  if (c.causal()) scores = ops::causal_mask(scores);
  Tensor probs = ops::dropout(ops::softmax(scores), rate, rng, active);
  Tensor context = ops::merge_heads(ops::bmm(probs, v), b, h);
  return ops::add_bias(ops::matmul(context, ckpt.param(p + "attention.output.weight")),
                       ckpt.param(p + "attention.output.bias"));
}

Tensor ffn_block(const Checkpoint& ckpt, const std::string& p, const Tensor& x, Real rate,
                 bool active, const RngStream& rng) {
  Tensor hidden = ops::gelu(
      ops::add_bias(ops::matmul(x, ckpt.param(p + "ffn.up.weight")), ckpt.param(p + "ffn.up.bias")));
  hidden = ops::dropout(hidden, rate, rng, active);
  return ops::add_bias(ops::matmul(hidden, ckpt.param(p + "ffn.down.weight")),
                       ckpt.param(p + "ffn.down.bias"));
}

Tensor pool(const Checkpoint& ckpt, const Tensor& h, const TokenBatch& batch) {
  const std::size_t t = batch.seq_len;
  switch (ckpt.config.pooling) {
    case Pooling::kMean:
      return ops::masked_mean_rows(h, batch.valid, batch.batch);
    case Pooling::kLastToken: {
      std::vector<std::size_t> rows(batch.batch);
      for (std::size_t b = 0; b < batch.batch; ++b) {
        std::size_t last = 0;
        for (std::size_t i = 0; i < t; ++i) {
          if (batch.valid[b * t + i]) last = i;
        }
        rows[b] = b * t + last;
      }
      return ops::gather_rows(h, rows);
    }
    case Pooling::kCls:
    default: {
      std::vector<std::size_t> rows(batch.batch);
      for (std::size_t b = 0; b < batch.batch; ++b) rows[b] = b * t;
      return ops::gather_rows(h, rows);
    }
  }
}

}  // namespace

Tensor forward_logits(const Checkpoint& ckpt, const TokenBatch& batch,
                      const DropoutConfig& dropout, bool dropout_active, const RngStream& rng) {
  const auto& c = ckpt.config;
  batch.validate();
  dropout.validate();
  if (batch.seq_len > c.max_seq_len) {
    throw std::invalid_argument("sequence length " + std::to_string(batch.seq_len) +
                                " exceeds max_seq_len " + std::to_string(c.max_seq_len));
  }
  for (auto id : batch.ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= c.vocab_size) {
      throw std::invalid_argument("token id " + std::to_string(id) + " outside vocabulary of size " +
                                  std::to_string(c.vocab_size));
    }
  }

  std::vector<std::int32_t> positions(batch.ids.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    positions[i] = static_cast<std::int32_t>(i % batch.seq_len);
  }
  Tensor h = ops::add(ops::embedding_lookup(ckpt.param("embeddings.token"), batch.ids),
                      ops::embedding_lookup(ckpt.param("embeddings.position"), positions));

  // Pre-norm residual blocks.
  for (std::size_t l = 0; l < c.layers; ++l) {
    const std::string p = "layers." + std::to_string(l) + ".";
    const RngStream attn_rng = rng.derive(2 * l + kAttentionSite);
    const RngStream ffn_rng = rng.derive(2 * l + kFfnSite);
    Tensor a = ops::layer_norm(h, ckpt.param(p + "attn_norm.gain"), ckpt.param(p + "attn_norm.bias"));
    h = ops::add(h, attention_block(ckpt, p, a, batch, dropout.attention_rate, dropout_active,
                                    attn_rng));
    Tensor f = ops::layer_norm(h, ckpt.param(p + "ffn_norm.gain"), ckpt.param(p + "ffn_norm.bias"));
    h = ops::add(h, ffn_block(ckpt, p, f, dropout.ffn_rate, dropout_active, ffn_rng));
  }
  h = ops::layer_norm(h, ckpt.param("final_norm.gain"), ckpt.param("final_norm.bias"));
  Tensor pooled = pool(ckpt, h, batch);
  return ops::add_bias(ops::matmul(pooled, ckpt.param("classifier.weight")),
                       ckpt.param("classifier.bias"));
}

std::vector<std::array<Real, 2>> forward(const Checkpoint& ckpt, const TokenBatch& batch,
                                         const DropoutConfig& dropout, InferenceMode mode,
                                         const RngStream& rng) {
  NoGradGuard no_grad;
  const bool active = mode == InferenceMode::kStochastic;
  Tensor probs = ops::softmax(forward_logits(ckpt, batch, dropout, active, rng));
  std::vector<std::array<Real, 2>> out(batch.batch);
  const auto pd = probs.data();
  for (std::size_t b = 0; b < batch.batch; ++b) out[b] = {pd[2 * b], pd[2 * b + 1]};
  return out;
}

}  // namespace mcdrop
