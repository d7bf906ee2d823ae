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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mcdrop {

#if defined(MCDROP_REAL_FLOAT)
using Real = float;
#else
using Real = double;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<Real> data;
  std::vector<Real> grad;  // empty until a gradient is accumulated
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward_fn;

  std::vector<Real>& ensure_grad();
};

}  // namespace detail

/// Dense row-major tensor with reverse-mode gradient tracking.
///
/// A Tensor is a cheap handle: copies share the same storage. Values produced
/// by ops are never modified afterwards; only leaf parameters are updated in
/// place, by the optimizer.
class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<Real> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, Real value, bool requires_grad = false);
  static Tensor scalar(Real value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t dim(std::size_t axis) const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;

  std::span<const Real> data() const;
  /// In-place access for leaf tensors (parameter updates, gradient checks).
  std::span<Real> mutable_data();
  Real item() const;

  bool requires_grad() const;
  /// Gradient after backward(); all zeros for a leaf that requires grad but
  /// was not reached. Empty for tensors that never required grad.
  std::span<const Real> grad() const;
  std::span<Real> mutable_grad();
  void zero_grad();

  /// A new leaf sharing no storage with this tensor.
  Tensor detach_copy(bool requires_grad = false) const;

  // Used by op implementations.
  static Tensor from_op(Shape shape, std::vector<Real> data,
                        std::vector<Tensor> inputs,
                        std::function<void(detail::Node&)> backward_fn);
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;
};

/// Propagates d(loss)/d(t) to every tensor in loss's graph that requires
/// grad. Gradients accumulate; call zero_grad() on leaves between steps.
void backward(const Tensor& loss);

/// Whether ops record graph edges on this thread.
bool grad_enabled();

/// Disables graph recording for its lifetime (inference paths).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace mcdrop
