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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcdrop/rng.hpp"
#include "mcdrop/tensor.hpp"

namespace mcdrop {

/// Dropout rates for the two stochastic sites of the model.
struct DropoutConfig {
  std::string name;
  Real attention_rate = 0;  // applied to attention probabilities after softmax
  Real ffn_rate = 0;        // applied to feed-forward hidden activations after GELU

  void validate() const;
  friend bool operator==(const DropoutConfig&, const DropoutConfig&) = default;
};

namespace presets {
DropoutConfig deterministic();
DropoutConfig baseline();
DropoutConfig high_attention();
DropoutConfig high_ffn();
DropoutConfig high_both();
}  // namespace presets

/// The five presets in canonical order: deterministic, baseline,
/// high_attention, high_ffn, high_both.
const std::vector<DropoutConfig>& standard_dropout_configs();
std::optional<DropoutConfig> find_dropout_preset(std::string_view name);

enum class Family { kEncoder, kDecoder };
enum class Pooling { kCls, kMean, kLastToken };

std::string to_string(Family family);
std::string to_string(Pooling pooling);
Family family_from_string(std::string_view s);
Pooling pooling_from_string(std::string_view s);

struct ModelConfig {
  Family family = Family::kEncoder;
  std::size_t layers = 4;
  std::size_t heads = 2;
  std::size_t d_model = 32;
  std::size_t d_ffn = 64;
  std::size_t vocab_size = 0;
  std::size_t max_seq_len = 32;
  Pooling pooling = Pooling::kCls;

  /// Decoders attend causally; encoders are bidirectional.
  bool causal() const { return family == Family::kDecoder; }
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Default pooling for a family: first token for encoders, last valid token
/// for decoders.
Pooling default_pooling(Family family);

struct NamedParameter {
  std::string name;
  Tensor value;
};

struct Checkpoint {
  ModelConfig config;
  std::vector<NamedParameter> parameters;
  std::uint64_t training_seed = 0;
  std::string provenance;
  /// Token strings by id; empty when the checkpoint was built without a corpus.
  std::vector<std::string> vocabulary;

  const Tensor& param(std::string_view name) const;
  Tensor& param(std::string_view name);
  std::size_t parameter_count() const;
  /// Deep copy; Checkpoint copies otherwise share parameter storage.
  Checkpoint clone() const;
};

/// Architecture parameter names and shapes in canonical order.
std::vector<std::pair<std::string, Shape>> parameter_layout(const ModelConfig& config);

/// Parameters drawn from a truncated normal (std 0.02, cut at two std) for
/// embeddings and projections, zeros for biases, ones for norm gains.
Checkpoint build(const ModelConfig& config, std::uint64_t init_seed);

/// Padded token ids for `batch` sequences of `seq_len` positions, row-major.
struct TokenBatch {
  std::size_t batch = 0;
  std::size_t seq_len = 0;
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> valid;  // 1 for real tokens, 0 for padding

  void validate() const;
};

enum class InferenceMode { kDeterministic, kStochastic };

std::string to_string(InferenceMode mode);
InferenceMode inference_mode_from_string(std::string_view s);

/// Class logits [batch, 2]. When `dropout_active`, the attention and FFN
/// dropout sites draw masks from streams derived from `rng`; nothing else is
/// stochastic. Records a graph when parameters require grad.
Tensor forward_logits(const Checkpoint& ckpt, const TokenBatch& batch,
                      const DropoutConfig& dropout, bool dropout_active, const RngStream& rng);

/// Per-sample class probabilities {p(false), p(true)} without graph
/// recording. Deterministic mode ignores `dropout` and `rng`.
std::vector<std::array<Real, 2>> forward(const Checkpoint& ckpt, const TokenBatch& batch,
                                         const DropoutConfig& dropout, InferenceMode mode,
                                         const RngStream& rng);

// Checkpoint container (versioned, bit-exact round trip).
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;
std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
/// SHA-256 of the serialized container.
std::string checkpoint_digest(const Checkpoint& ckpt);

}  // namespace mcdrop
