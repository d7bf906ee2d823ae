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
#include <cstdio>
#include <map>

#include "mcdrop/report.hpp"

namespace mcdrop::report {

namespace {

std::string printf_double(const char* pattern, double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  std::string s = buf;
  // Values that round to zero print without a minus sign.
  if (s[0] == '-' && s.find_first_not_of("0.", 1) == std::string::npos) {
    if (pattern[1] == '+') {
      s[0] = '+';
    } else {
      s.erase(0, 1);
    }
  }
  return s;
}

std::string optional_cell(const std::optional<double>& v, std::string (*format)(double)) {
  return v ? format(*v) : "n/a";
}

struct Grid {
  std::string name;
  std::string title;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;  // txt only
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const Grid& g) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(g.columns);
  for (const auto& r : g.rows) line(r);
  return out;
}

std::string render_txt(const Grid& g, const ReportBundle& bundle) {
  std::vector<std::size_t> width(g.columns.size());
  for (std::size_t c = 0; c < g.columns.size(); ++c) width[c] = g.columns[c].size();
  for (const auto& r : g.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out = g.title + "\n";
  out += "sweep " + bundle.sweep_id + ", generated " + bundle.generated_at + "\n\n";
  auto line = [&](const std::vector<std::string>& cells) {
    std::string l;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& s = cells[c];
      const std::string pad(width[c] - s.size(), ' ');
      // First column left-aligned, numbers right-aligned.
      l += c == 0 ? s + pad : "  " + pad + s;
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  };
  line(g.columns);
  std::size_t total = 0;
  for (auto w : width) total += w + 2;
  out += std::string(total - 2, '-') + "\n";
  for (const auto& r : g.rows) line(r);
  if (!g.notes.empty()) out += "\n";
  for (const auto& n : g.notes) out += n + "\n";
  return out;
}

Grid summaries_grid(const ReportBundle& b) {
  Grid g{"summaries", "Run summaries (mean and population std over passes)",
         {"model", "family", "config", "overall", "overall_std", "memory", "memory_std",
          "reasoning", "reasoning_std", "delta_cog"},
         {},
         {}};
  for (const auto& r : b.summaries) {
    const auto& s = r.summary;
    g.rows.push_back({r.model_id, r.family, r.config, fmt_accuracy(s.mean_overall),
                      fmt_std(s.std_overall), optional_cell(s.mean_memory, fmt_accuracy),
                      optional_cell(s.std_memory, fmt_std),
                      optional_cell(s.mean_reasoning, fmt_accuracy),
                      optional_cell(s.std_reasoning, fmt_std), optional_cell(s.delta_cog, fmt_gap)});
  }
  return g;
}

Grid top_grid(const ReportBundle& b) {
  Grid g{"top_models",
         "Top " + std::to_string(b.top_k) + " models by overall accuracy (" + b.top_config + ")",
         {"model", "overall", "memory", "reasoning", "overall_std", "memory_std", "reasoning_std"},
         {},
         {}};
  for (const auto& r : b.top_table) {
    const auto& s = r.summary;
    g.rows.push_back({r.model_id, fmt_accuracy(s.mean_overall),
                      optional_cell(s.mean_memory, fmt_accuracy),
                      optional_cell(s.mean_reasoning, fmt_accuracy), fmt_std(s.std_overall),
                      optional_cell(s.std_memory, fmt_std), optional_cell(s.std_reasoning, fmt_std)});
  }
  return g;
}

Grid degradation_grid(const ReportBundle& b) {
  const auto& t = b.degradation_table;
  Grid g{"degradation",
         "Deterministic inference against baseline MC dropout (most negative first)",
         {"model", "deterministic_mean", "deterministic_std", "baseline_mean", "baseline_std",
          "degradation"},
         {},
         {}};
  for (const auto& e : t.entries) {
    g.rows.push_back({e.model_id, fmt_accuracy(e.deterministic_mean), fmt_std(e.deterministic_std),
                      fmt_accuracy(e.baseline_mean), fmt_std(e.baseline_std),
                      fmt_gap(e.degradation)});
  }
  g.notes.push_back("deterministic ahead in " + std::to_string(t.negative.count) + " of " +
                    std::to_string(t.negative.total) + " models (" +
                    fmt_accuracy(t.negative.fraction) + ")");
  for (const auto& w : t.warnings) g.notes.push_back("warning: " + w);
  return g;
}

Grid config_grid(const ReportBundle& b) {
  Grid g{"config_effects", "Dropout configuration effects (unweighted mean across models)",
         {"config", "models", "memory", "reasoning", "gap"},
         {},
         {}};
  for (const auto& r : b.config_effect_table) {
    g.rows.push_back({r.config, std::to_string(r.models), fmt_accuracy(r.mean_memory),
                      fmt_accuracy(r.mean_reasoning), fmt_gap(r.gap)});
  }
  return g;
}

Grid census_grid(const ReportBundle& b) {
  Grid g{"bias_census", "Memory bias census (" + b.top_config + ")",
         {"group", "positive", "models", "fraction", "memory", "reasoning", "mean_delta"},
         {},
         {}};
  for (const auto& r : b.bias_census) {
    g.rows.push_back({r.group, std::to_string(r.positive.count), std::to_string(r.positive.total),
                      fmt_accuracy(r.positive.fraction), fmt_accuracy(r.mean_memory),
                      fmt_accuracy(r.mean_reasoning), fmt_gap(r.mean_delta)});
  }
  return g;
}

Grid comparisons_grid(const ReportBundle& b) {
  Grid g{"comparisons", "Welch t-tests with Bonferroni correction",
         {"label_a", "label_b", "mean_diff", "t_stat", "df", "p_raw", "p_adjusted",
          "alpha_adjusted", "cohens_d", "significant", "degenerate"},
         {},
         {}};
  for (const auto& c : b.comparisons) {
    g.rows.push_back({c.label_a, c.label_b, fmt_stat(c.mean_diff), fmt_stat(c.t_stat),
                      fmt_stat(c.df), fmt_stat(c.p_raw), fmt_stat(c.p_adjusted),
                      fmt_stat(c.alpha_adjusted), fmt_stat(c.cohens_d),
                      c.significant ? "yes" : "no", c.degenerate ? "yes" : "no"});
  }
  return g;
}

}  // namespace

std::string fmt_accuracy(double v) { return printf_double("%.3f", v); }
std::string fmt_std(double v) { return printf_double("%.4f", v); }
std::string fmt_gap(double v) { return printf_double("%+.3f", v); }
std::string fmt_stat(double v) { return printf_double("%.6g", v); }
std::string fmt_exact(double v) { return printf_double("%.17g", v); }

std::vector<SummaryRecord> top_models(const std::vector<SummaryRecord>& records,
                                      const std::string& config, std::size_t k) {
  auto out = stats::select_config(records, config);
  std::stable_sort(out.begin(), out.end(), [](const SummaryRecord& x, const SummaryRecord& y) {
    if (x.summary.mean_overall != y.summary.mean_overall) {
      return x.summary.mean_overall > y.summary.mean_overall;
    }
    return x.model_id < y.model_id;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<CensusRow> census_by_family(const std::vector<SummaryRecord>& records,
                                        const std::string& config) {
  const auto selected = stats::select_config(records, config);
  std::vector<std::string> groups{"all"};
  for (const auto& r : selected) {
    if (!r.family.empty() && std::find(groups.begin(), groups.end(), r.family) == groups.end()) {
      groups.push_back(r.family);
    }
  }
  std::sort(groups.begin() + 1, groups.end());

  std::vector<CensusRow> rows;
  for (const auto& group : groups) {
    std::vector<SummaryRecord> members;
    for (const auto& r : selected) {
      if (group == "all" || r.family == group) members.push_back(r);
    }
    if (members.empty()) continue;
    const auto census = stats::memory_bias_census(members);
    CensusRow row{group, census.positive, 0, 0, census.mean_delta};
    for (const auto& r : members) {
      if (!r.summary.delta_cog) continue;
      row.mean_memory += *r.summary.mean_memory;
      row.mean_reasoning += *r.summary.mean_reasoning;
    }
    if (row.positive.total) {
      row.mean_memory /= static_cast<double>(row.positive.total);
      row.mean_reasoning /= static_cast<double>(row.positive.total);
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<Document> render_tables(const ReportBundle& bundle) {
  std::vector<Grid> grids{summaries_grid(bundle), top_grid(bundle), degradation_grid(bundle),
                          config_grid(bundle), census_grid(bundle)};
  if (!bundle.comparisons.empty()) grids.push_back(comparisons_grid(bundle));
  std::vector<Document> docs;
  for (const auto& g : grids) {
    docs.push_back({g.name + ".txt", render_txt(g, bundle)});
    docs.push_back({g.name + ".csv", render_csv(g)});
  }
  return docs;
}

}  // namespace mcdrop::report
