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
#include <map>
#include <stdexcept>

#include "mcdrop/stats.hpp"

namespace mcdrop::stats {

CountFraction count_fraction(std::size_t count, std::size_t total) {
  if (count > total) throw std::invalid_argument("count exceeds total");
  return {count, total, total == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(total)};
}

std::vector<SummaryRecord> select_config(const std::vector<SummaryRecord>& records,
                                         const std::string& config) {
  std::vector<SummaryRecord> out;
  for (const auto& r : records) {
    if (r.config == config) out.push_back(r);
  }
  return out;
}

DegradationTable degradation_table(const std::vector<SummaryRecord>& records,
                                   const std::string& deterministic_config,
                                   const std::string& baseline_config) {
  DegradationTable table;
  std::map<std::string, const SummaryRecord*> det, base;
  std::vector<std::string> models;
  for (const auto& r : records) {
    if (std::find(models.begin(), models.end(), r.model_id) == models.end()) {
      models.push_back(r.model_id);
    }
    if (r.config == deterministic_config) det[r.model_id] = &r;
    if (r.config == baseline_config) base[r.model_id] = &r;
  }
  for (const auto& model : models) {
    auto d = det.find(model);
    auto b = base.find(model);
    if (d == det.end() || b == base.end()) {
      table.warnings.push_back("model '" + model + "' lacks a " +
                               (d == det.end() ? deterministic_config : baseline_config) +
                               " summary; skipped");
      continue;
    }
    const auto& ds = d->second->summary;
    const auto& bs = b->second->summary;
    table.entries.push_back({model, ds.mean_overall, ds.std_overall, bs.mean_overall,
                             bs.std_overall, bs.mean_overall - ds.mean_overall});
  }
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const DegradationEntry& x, const DegradationEntry& y) {
                     if (x.degradation != y.degradation) return x.degradation < y.degradation;
                     return x.model_id < y.model_id;
                   });
  std::size_t negative = 0;
  for (const auto& e : table.entries) negative += e.degradation < 0;
  table.negative = count_fraction(negative, table.entries.size());
  return table;
}

std::vector<ConfigEffectRow> config_effect_table(const std::vector<SummaryRecord>& records) {
  std::vector<std::string> order;
  for (const auto& preset : standard_dropout_configs()) order.push_back(preset.name);
  std::vector<std::string> extra;
  for (const auto& r : records) {
    if (std::find(order.begin(), order.end(), r.config) == order.end() &&
        std::find(extra.begin(), extra.end(), r.config) == extra.end()) {
      extra.push_back(r.config);
    }
  }
  std::sort(extra.begin(), extra.end());
  order.insert(order.end(), extra.begin(), extra.end());

  std::vector<ConfigEffectRow> rows;
  for (const auto& config : order) {
    ConfigEffectRow row{config, 0, 0, 0, 0};
    double mem = 0, rea = 0;
    for (const auto& r : records) {
      if (r.config != config || !r.summary.mean_memory || !r.summary.mean_reasoning) continue;
      mem += *r.summary.mean_memory;
      rea += *r.summary.mean_reasoning;
      ++row.models;
    }
    if (row.models == 0) continue;
    row.mean_memory = mem / static_cast<double>(row.models);
    row.mean_reasoning = rea / static_cast<double>(row.models);
    row.gap = memory_reasoning_differential(row.mean_memory, row.mean_reasoning);
    rows.push_back(row);
  }
  return rows;
}

StabilityQuartiles stability_quartiles(const std::vector<SummaryRecord>& records, double alpha) {
  if (records.size() < 4) {
    throw std::invalid_argument("stability_quartiles needs at least four models");
  }
  std::vector<const SummaryRecord*> ranked;
  for (const auto& r : records) ranked.push_back(&r);
  std::stable_sort(ranked.begin(), ranked.end(), [](const SummaryRecord* x, const SummaryRecord* y) {
    if (x->summary.std_overall != y->summary.std_overall) {
      return x->summary.std_overall < y->summary.std_overall;
    }
    return x->model_id < y->model_id;
  });

  StabilityQuartiles out;
  for (const auto* r : ranked) out.ranked.push_back(r->model_id);
  const std::size_t q = ranked.size() / 4;
  std::vector<const SummaryRecord*> bottom(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(q));
  std::vector<const SummaryRecord*> top(ranked.end() - static_cast<std::ptrdiff_t>(q), ranked.end());
  for (const auto* r : bottom) out.bottom.push_back(r->model_id);
  for (const auto* r : top) out.top.push_back(r->model_id);
  if (q < 2) return out;

  auto collect = [](const std::vector<const SummaryRecord*>& group, int measure,
                    std::vector<double>& values) {
    for (const auto* r : group) {
      const auto& s = r->summary;
      if (measure == 0) {
        values.push_back(s.mean_overall);
      } else {
        const auto& v = measure == 1 ? s.mean_memory : s.mean_reasoning;
        if (!v) return false;
        values.push_back(*v);
      }
    }
    return true;
  };
  const char* names[] = {"overall", "memory", "reasoning"};
  for (int measure = 0; measure < 3; ++measure) {
    std::vector<double> a, b;
    if (!collect(bottom, measure, a) || !collect(top, measure, b)) continue;
    out.comparisons.push_back(compare(a, b, kQuartileFamilySize, alpha,
                                      std::string("bottom_quartile.") + names[measure],
                                      std::string("top_quartile.") + names[measure]));
  }
  return out;
}

BiasCensus memory_bias_census(const std::vector<SummaryRecord>& records) {
  if (records.empty()) throw std::invalid_argument("memory_bias_census on an empty set");
  BiasCensus census;
  std::size_t positive = 0, counted = 0;
  double total = 0;
  for (const auto& r : records) {
    if (!r.summary.delta_cog) {
      census.warnings.push_back("model '" + r.model_id + "' has no memory/reasoning split; skipped");
      continue;
    }
    ++counted;
    positive += *r.summary.delta_cog > 0;
    total += *r.summary.delta_cog;
  }
  census.positive = count_fraction(positive, counted);
  census.mean_delta = counted ? total / static_cast<double>(counted) : 0.0;
  return census;
}

}  // namespace mcdrop::stats
