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
#include <vector>

#include "mcdrop/rng.hpp"
#include "mcdrop/tensor.hpp"

/// Differentiable tensor ops. Every op throws std::invalid_argument on shape
/// mismatch and records a backward edge when any input requires grad.
namespace mcdrop::ops {

// a: [n, k], b: [k, m] -> [n, m]
Tensor matmul(const Tensor& a, const Tensor& b);
// a: [g, n, k], b: [g, k, m] (or [g, m, k] when transpose_b) -> [g, n, m]
Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b = false);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// x: [n, m], bias: [m]
Tensor add_bias(const Tensor& x, const Tensor& bias);
Tensor scale(const Tensor& x, Real factor);
Tensor sum(const Tensor& x);

/// Row-wise over the last axis: (x - mean) / sqrt(var + eps) * gain + bias,
/// population variance.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  Real eps = Real(1e-5));
/// Softmax over the last axis.
Tensor softmax(const Tensor& x);
/// Exact (erf-based) GELU.
Tensor gelu(const Tensor& x);

/// table: [vocab, d]; returns [ids.size(), d].
Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids);

/// Value written into masked attention scores. exp() of it underflows to an
/// exact zero after max-subtraction.
inline constexpr Real kMaskedScore = Real(-1e9);

/// scores: [g, t, t]; entries with key index > query index are masked.
Tensor causal_mask(const Tensor& scores);
/// scores: [batch * heads, t, t]; key_valid: [batch * t] flags. Keys with a
/// zero flag are masked for every query.
Tensor key_padding_mask(const Tensor& scores, std::span<const std::uint8_t> key_valid,
                        std::size_t heads);

/// x: [batch * t, heads * dh] -> [batch * heads, t, dh]
Tensor split_heads(const Tensor& x, std::size_t batch, std::size_t t, std::size_t heads);
/// Inverse of split_heads.
Tensor merge_heads(const Tensor& x, std::size_t batch, std::size_t heads);

/// x: [n, d] -> [indices.size(), d]
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> indices);
/// x: [batch * t, d] -> [batch, d], mean over rows whose valid flag is set.
Tensor masked_mean_rows(const Tensor& x, std::span<const std::uint8_t> valid,
                        std::size_t batch);

/// Mean softmax cross-entropy. logits: [n, classes]; labels in [0, classes).
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

/// Inverted dropout. Identity when !active or rate == 0; otherwise each
/// element is zeroed with probability `rate` and survivors are scaled by
/// 1 / (1 - rate). The mask is a pure function of `rng`.
Tensor dropout(const Tensor& x, Real rate, const RngStream& rng, bool active);

}  // namespace mcdrop::ops
