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
#include <functional>
#include <utility>
#include <vector>

#include "fixtures.hpp"
#include "mcdrop/tensor.hpp"

namespace mcdrop::testing {

/// Uniform trainable tensor drawn from a seeded stream.
Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1, double hi = 1);

/// One differentiable op wired to a scalar loss: make(seed) returns the
/// inputs to perturb and the closure recomputing the loss from them.
struct OpCase {
  const char* name;
  std::function<std::pair<std::vector<Tensor>, std::function<Tensor()>>(std::uint64_t)> make;
};

/// Every differentiable op in the numerics layer.
std::vector<OpCase> op_cases();

/// Full gradient check of a perturbed two-layer model under high dropout
/// with a fixed mask stream; `seed` picks parameters, batch and masks.
GradCheckResult model_grad_check(Family family, std::uint64_t seed, double h = 1e-5);

}  // namespace mcdrop::testing
