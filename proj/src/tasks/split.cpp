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
#include <stdexcept>

#include "mcdrop/rng.hpp"
#include "mcdrop/tasks.hpp"

namespace mcdrop {

DatasetSplit split(const std::vector<Sample>& samples, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  }
  DatasetSplit out;
  out.seed = seed;
  auto engine = RngStream(seed, 0x73706c).engine();
  for (Domain domain : {Domain::kMemory, Domain::kReasoning}) {
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].domain == domain) indices.push_back(i);
    }
    std::shuffle(indices.begin(), indices.end(), engine);
    // The epsilon keeps exact products such as 500 * 0.2 from flooring to 99.
    const auto n_test = static_cast<std::size_t>(
        std::floor(static_cast<double>(indices.size()) * (1.0 - fraction) + 1e-9));
    std::vector<std::size_t> test(indices.begin(), indices.begin() + n_test);
    std::vector<std::size_t> train(indices.begin() + n_test, indices.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    for (auto i : train) out.train.push_back(samples[i]);
    for (auto i : test) out.test.push_back(samples[i]);
  }
  return out;
}

}  // namespace mcdrop
