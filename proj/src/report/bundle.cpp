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
#include <map>
#include <regex>
#include <set>

#include "mcdrop/report.hpp"

namespace mcdrop::report {

namespace fs = std::filesystem;

void rebuild_derived(ReportBundle& b) {
  b.top_table = top_models(b.summaries, b.top_config, b.top_k);
  b.degradation_table = stats::degradation_table(b.summaries);
  b.config_effect_table = stats::config_effect_table(b.summaries);
  b.bias_census = census_by_family(b.summaries, b.top_config);
  b.figures = render_figures(b);
}

ReportBundle make_bundle(std::string sweep_id, std::string generated_at,
                         std::vector<SummaryRecord> summaries,
                         std::vector<stats::ComparisonResult> comparisons, std::size_t top_k) {
  ReportBundle b;
  b.sweep_id = std::move(sweep_id);
  b.generated_at = std::move(generated_at);
  b.top_k = top_k;
  b.summaries = std::move(summaries);
  b.comparisons = std::move(comparisons);
  rebuild_derived(b);
  return b;
}

std::vector<Document> render_raw(const ReportBundle& b) {
  std::string comparisons;
  for (const auto& c : b.comparisons) comparisons += jsonl_line(stats::comparison_to_json(c));
  ordered_json meta;
  meta["record"] = "report_bundle";
  meta["sweep_id"] = b.sweep_id;
  meta["generated_at"] = b.generated_at;
  meta["top_config"] = b.top_config;
  meta["top_k"] = b.top_k;
  meta["figure_models"] = b.figure_models;
  return {{"bundle.json", meta.dump(2) + "\n"},
          {"summaries.jsonl", serialize_summaries(b.summaries)},
          {"comparisons.jsonl", comparisons}};
}

fs::path write_bundle(const ReportBundle& bundle, const fs::path& root) {
  const fs::path dir = root / bundle.sweep_id;
  for (const auto& d : render_raw(bundle)) write_file_atomic(dir / "raw" / d.name, d.content);
  for (const auto& d : render_tables(bundle)) write_file_atomic(dir / "tables" / d.name, d.content);
  for (const auto& d : bundle.figures) write_file_atomic(dir / "figures" / d.name, d.content);
  return dir;
}

ReportBundle load_bundle(const fs::path& dir) {
  const fs::path raw = dir / "raw";
  const json meta = json::parse(read_file(raw / "bundle.json"));
  auto summaries = parse_summaries(read_file(raw / "summaries.jsonl"),
                                   (raw / "summaries.jsonl").string());
  std::vector<stats::ComparisonResult> comparisons;
  const fs::path comparisons_path = raw / "comparisons.jsonl";
  if (fs::exists(comparisons_path)) {
    for (const auto& line : parse_jsonl(read_file(comparisons_path), comparisons_path.string())) {
      try {
        comparisons.push_back(stats::comparison_from_json(line.value));
      } catch (const json::exception& e) {
        throw ParseError(comparisons_path.string(), line.line_number, 1, e.what());
      }
    }
  }
  ReportBundle b;
  b.sweep_id = meta.at("sweep_id").get<std::string>();
  b.generated_at = meta.at("generated_at").get<std::string>();
  b.top_config = meta.value("top_config", std::string("baseline"));
  b.top_k = meta.value("top_k", std::size_t{5});
  b.figure_models = meta.value("figure_models", std::size_t{5});
  b.summaries = std::move(summaries);
  b.comparisons = std::move(comparisons);
  rebuild_derived(b);
  return b;
}

// ---------------------------------------------------------------------------
// Audit. The checks below recompute every value straight from the raw
// records instead of reusing the bundle's derived tables.

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      row.push_back(std::move(cell));
      cell.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (any || !row.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct Auditor {
  AuditReport& report;
  std::string file;
  std::size_t row = 0;

  void problem(const std::string& what) {
    report.problems.push_back(file + (row ? " row " + std::to_string(row) : std::string()) + ": " +
                              what);
  }

  void expect(const std::string& column, const std::string& expected, const std::string& actual) {
    ++report.numbers_checked;
    if (expected != actual) {
      problem("column '" + column + "' is '" + actual + "', records give '" + expected + "'");
    }
  }

  void expect_text(const std::string& column, const std::string& expected,
                   const std::string& actual) {
    if (expected != actual) {
      problem("column '" + column + "' is '" + actual + "', expected '" + expected + "'");
    }
  }
};

std::string opt(const std::optional<double>& v, std::string (*format)(double)) {
  return v ? format(*v) : "n/a";
}

using Table = std::vector<std::vector<std::string>>;

// Checks the header row and returns the body rows.
bool split_header(Auditor& a, const Table& t, const std::vector<std::string>& columns,
                  std::vector<std::vector<std::string>>& body) {
  if (t.empty() || t.front() != columns) {
    a.problem("unexpected header");
    return false;
  }
  body.assign(t.begin() + 1, t.end());
  for (std::size_t i = 0; i < body.size(); ++i) {
    if (body[i].size() != columns.size()) {
      a.row = i + 1;
      a.problem("wrong number of cells");
      return false;
    }
  }
  return true;
}

void check_summary_cells(Auditor& a, const std::vector<std::string>& cells, std::size_t offset,
                         const RunSummary& s, bool with_delta, bool top_order) {
  // top_models orders columns as means then stds.
  if (top_order) {
    a.expect("overall", fmt_accuracy(s.mean_overall), cells[offset + 0]);
    a.expect("memory", opt(s.mean_memory, fmt_accuracy), cells[offset + 1]);
    a.expect("reasoning", opt(s.mean_reasoning, fmt_accuracy), cells[offset + 2]);
    a.expect("overall_std", fmt_std(s.std_overall), cells[offset + 3]);
    a.expect("memory_std", opt(s.std_memory, fmt_std), cells[offset + 4]);
    a.expect("reasoning_std", opt(s.std_reasoning, fmt_std), cells[offset + 5]);
    return;
  }
  a.expect("overall", fmt_accuracy(s.mean_overall), cells[offset + 0]);
  a.expect("overall_std", fmt_std(s.std_overall), cells[offset + 1]);
  a.expect("memory", opt(s.mean_memory, fmt_accuracy), cells[offset + 2]);
  a.expect("memory_std", opt(s.std_memory, fmt_std), cells[offset + 3]);
  a.expect("reasoning", opt(s.mean_reasoning, fmt_accuracy), cells[offset + 4]);
  a.expect("reasoning_std", opt(s.std_reasoning, fmt_std), cells[offset + 5]);
  if (with_delta) {
    std::optional<double> delta;
    if (s.mean_memory && s.mean_reasoning) delta = *s.mean_memory - *s.mean_reasoning;
    a.expect("delta_cog", opt(delta, fmt_gap), cells[offset + 6]);
  }
}

void audit_summaries(Auditor& a, const Table& t, const std::vector<SummaryRecord>& records) {
  std::vector<std::vector<std::string>> body;
  if (!split_header(a, t,
                    {"model", "family", "config", "overall", "overall_std", "memory", "memory_std",
                     "reasoning", "reasoning_std", "delta_cog"},
                    body)) {
    return;
  }
  if (body.size() != records.size()) a.problem("row count differs from summary records");
  for (std::size_t i = 0; i < std::min(body.size(), records.size()); ++i) {
    a.row = i + 1;
    const auto& r = records[i];
    a.expect_text("model", r.model_id, body[i][0]);
    a.expect_text("config", r.config, body[i][2]);
    check_summary_cells(a, body[i], 3, r.summary, true, false);
  }
}

void audit_top(Auditor& a, const Table& t, const std::vector<SummaryRecord>& records,
               const std::string& config, std::size_t k) {
  std::vector<std::vector<std::string>> body;
  if (!split_header(a, t,
                    {"model", "overall", "memory", "reasoning", "overall_std", "memory_std",
                     "reasoning_std"},
                    body)) {
    return;
  }
  std::vector<const SummaryRecord*> ranked;
  for (const auto& r : records) {
    if (r.config == config) ranked.push_back(&r);
  }
  std::sort(ranked.begin(), ranked.end(), [](const SummaryRecord* x, const SummaryRecord* y) {
    return x->summary.mean_overall != y->summary.mean_overall
               ? x->summary.mean_overall > y->summary.mean_overall
               : x->model_id < y->model_id;
  });
  if (ranked.size() > k) ranked.resize(k);
  if (body.size() != ranked.size()) a.problem("row count differs from the top-k selection");
  for (std::size_t i = 0; i < std::min(body.size(), ranked.size()); ++i) {
    a.row = i + 1;
    a.expect_text("model", ranked[i]->model_id, body[i][0]);
    check_summary_cells(a, body[i], 1, ranked[i]->summary, false, true);
  }
}

const SummaryRecord* find_record(const std::vector<SummaryRecord>& records,
                                 const std::string& model, const std::string& config) {
  for (const auto& r : records) {
    if (r.model_id == model && r.config == config) return &r;
  }
  return nullptr;
}

void audit_degradation(Auditor& a, const Table& t, const std::vector<SummaryRecord>& records) {
  std::vector<std::vector<std::string>> body;
  if (!split_header(a, t,
                    {"model", "deterministic_mean", "deterministic_std", "baseline_mean",
                     "baseline_std", "degradation"},
                    body)) {
    return;
  }
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < body.size(); ++i) {
    a.row = i + 1;
    const auto* det = find_record(records, body[i][0], "deterministic");
    const auto* base = find_record(records, body[i][0], "baseline");
    if (!det || !base) {
      a.problem("model '" + body[i][0] + "' has no deterministic/baseline records");
      continue;
    }
    const double gap = base->summary.mean_overall - det->summary.mean_overall;
    a.expect("deterministic_mean", fmt_accuracy(det->summary.mean_overall), body[i][1]);
    a.expect("deterministic_std", fmt_std(det->summary.std_overall), body[i][2]);
    a.expect("baseline_mean", fmt_accuracy(base->summary.mean_overall), body[i][3]);
    a.expect("baseline_std", fmt_std(base->summary.std_overall), body[i][4]);
    a.expect("degradation", fmt_gap(gap), body[i][5]);
    if (gap < previous) a.problem("rows are not sorted by degradation");
    previous = gap;
  }
}

void audit_config_effects(Auditor& a, const Table& t, const std::vector<SummaryRecord>& records) {
  std::vector<std::vector<std::string>> body;
  if (!split_header(a, t, {"config", "models", "memory", "reasoning", "gap"}, body)) return;
  for (std::size_t i = 0; i < body.size(); ++i) {
    a.row = i + 1;
    double mem = 0, rea = 0;
    std::size_t n = 0;
    for (const auto& r : records) {
      if (r.config != body[i][0] || !r.summary.mean_memory || !r.summary.mean_reasoning) continue;
      mem += *r.summary.mean_memory;
      rea += *r.summary.mean_reasoning;
      ++n;
    }
    if (n == 0) {
      a.problem("config '" + body[i][0] + "' has no records with both domains");
      continue;
    }
    mem /= static_cast<double>(n);
    rea /= static_cast<double>(n);
    a.expect("models", std::to_string(n), body[i][1]);
    a.expect("memory", fmt_accuracy(mem), body[i][2]);
    a.expect("reasoning", fmt_accuracy(rea), body[i][3]);
    a.expect("gap", fmt_gap(mem - rea), body[i][4]);
  }
}

void audit_census(Auditor& a, const Table& t, const std::vector<SummaryRecord>& records,
                  const std::string& config) {
  std::vector<std::vector<std::string>> body;
  if (!split_header(a, t,
                    {"group", "positive", "models", "fraction", "memory", "reasoning",
                     "mean_delta"},
                    body)) {
    return;
  }
  for (std::size_t i = 0; i < body.size(); ++i) {
    a.row = i + 1;
    const std::string& group = body[i][0];
    std::size_t n = 0, positive = 0;
    double mem = 0, rea = 0;
    for (const auto& r : records) {
      if (r.config != config || (group != "all" && r.family != group)) continue;
      if (!r.summary.mean_memory || !r.summary.mean_reasoning) continue;
      ++n;
      mem += *r.summary.mean_memory;
      rea += *r.summary.mean_reasoning;
      positive += *r.summary.mean_memory - *r.summary.mean_reasoning > 0;
    }
    if (n == 0) {
      a.problem("group '" + group + "' has no records with both domains");
      continue;
    }
    const double dn = static_cast<double>(n);
    a.expect("positive", std::to_string(positive), body[i][1]);
    a.expect("models", std::to_string(n), body[i][2]);
    a.expect("fraction", fmt_accuracy(static_cast<double>(positive) / dn), body[i][3]);
    a.expect("memory", fmt_accuracy(mem / dn), body[i][4]);
    a.expect("reasoning", fmt_accuracy(rea / dn), body[i][5]);
    a.expect("mean_delta", fmt_gap((mem - rea) / dn), body[i][6]);
  }
}

void audit_comparisons(Auditor& a, const Table& t,
                       const std::vector<stats::ComparisonResult>& comparisons) {
  std::vector<std::vector<std::string>> body;
  if (!split_header(a, t,
                    {"label_a", "label_b", "mean_diff", "t_stat", "df", "p_raw", "p_adjusted",
                     "alpha_adjusted", "cohens_d", "significant", "degenerate"},
                    body)) {
    return;
  }
  if (body.size() != comparisons.size()) a.problem("row count differs from comparison records");
  for (std::size_t i = 0; i < std::min(body.size(), comparisons.size()); ++i) {
    a.row = i + 1;
    const auto& c = comparisons[i];
    a.expect_text("label_a", c.label_a, body[i][0]);
    a.expect_text("label_b", c.label_b, body[i][1]);
    a.expect("mean_diff", fmt_stat(c.mean_diff), body[i][2]);
    a.expect("t_stat", fmt_stat(c.t_stat), body[i][3]);
    a.expect("df", fmt_stat(c.df), body[i][4]);
    a.expect("p_raw", fmt_stat(c.p_raw), body[i][5]);
    a.expect("p_adjusted", fmt_stat(std::min(1.0, c.p_raw * static_cast<double>(c.family_size))),
             body[i][6]);
    a.expect("alpha_adjusted", fmt_stat(c.alpha / static_cast<double>(c.family_size)), body[i][7]);
    a.expect("cohens_d", fmt_stat(c.cohens_d), body[i][8]);
    a.expect_text("significant",
                  c.p_raw < c.alpha / static_cast<double>(c.family_size) ? "yes" : "no",
                  body[i][9]);
  }
}

void audit_figure(Auditor& a, const std::string& svg, int metric,
                  const std::vector<SummaryRecord>& records) {
  auto value = [&](const RunSummary& s, bool want_std) -> std::optional<double> {
    switch (metric) {
      case 0: return want_std ? s.std_overall : s.mean_overall;
      case 1: return want_std ? s.std_memory : s.mean_memory;
      default: return want_std ? s.std_reasoning : s.mean_reasoning;
    }
  };
  static const std::regex bar_re(
      R"re(<rect x="[^"]*" y="[^"]*" width="[^"]*" height="([^"]*)" fill="[^"]*" data-model="([^"]*)" data-series="([^"]*)" data-mean="([^"]*)" data-std="([^"]*)"/>)re");
  std::size_t bars = 0;
  for (std::sregex_iterator it(svg.begin(), svg.end(), bar_re), end; it != end; ++it) {
    ++bars;
    const std::string model = (*it)[2], series = (*it)[3];
    const auto* r = find_record(records, model, series);
    if (!r) {
      a.problem("bar for unknown record " + model + "/" + series);
      continue;
    }
    const auto mean = value(r->summary, false), sd = value(r->summary, true);
    if (!mean || !sd) {
      a.problem("bar for " + model + "/" + series + " has no matching measure");
      continue;
    }
    a.expect(model + "/" + series + " mean", fmt_exact(*mean), (*it)[4]);
    a.expect(model + "/" + series + " std", fmt_exact(*sd), (*it)[5]);
    char height[32];
    std::snprintf(height, sizeof height, "%.2f", 260.0 * *mean);
    a.expect(model + "/" + series + " height", height, (*it)[1]);
    const std::string data_line = model + "," + series + "," + fmt_exact(*mean) + "," +
                                  fmt_exact(*sd) + "\n";
    ++a.report.numbers_checked;
    if (model.find("--") == std::string::npos && svg.find(data_line) == std::string::npos) {
      a.problem("data comment lacks the line for " + model + "/" + series);
    }
  }
  if (bars % 2 != 0) a.problem("bars do not come in pairs");
}

}  // namespace

AuditReport audit_bundle(const fs::path& dir) {
  AuditReport report;
  ReportBundle bundle;
  try {
    bundle = load_bundle(dir);
  } catch (const std::exception& e) {
    report.problems.push_back(std::string("cannot load raw records: ") + e.what());
    return report;
  }

  // Byte-for-byte re-render.
  std::map<std::string, std::string> expected;
  for (const auto& d : render_tables(bundle)) expected["tables/" + d.name] = d.content;
  for (const auto& d : render_figures(bundle)) expected["figures/" + d.name] = d.content;
  std::set<std::string> seen;
  for (const char* sub : {"tables", "figures"}) {
    if (!fs::is_directory(dir / sub)) continue;
    for (const auto& entry : fs::directory_iterator(dir / sub)) {
      const std::string rel = std::string(sub) + "/" + entry.path().filename().string();
      seen.insert(rel);
      if (!expected.count(rel)) report.problems.push_back(rel + ": not derivable from raw records");
    }
  }
  for (const auto& [rel, content] : expected) {
    if (!seen.count(rel)) {
      report.problems.push_back(rel + ": missing");
      continue;
    }
    ++report.files_checked;
    if (read_file(dir / rel) != content) {
      report.problems.push_back(rel + ": differs from a fresh rendering of the raw records");
    }
  }

  // Independent recomputation of every number.
  const auto& records = bundle.summaries;
  auto csv = [&](const std::string& name) -> std::optional<Table> {
    const fs::path p = dir / "tables" / name;
    if (!fs::exists(p)) return std::nullopt;
    return parse_csv(read_file(p));
  };
  if (auto t = csv("summaries.csv")) {
    Auditor a{report, "tables/summaries.csv"};
    audit_summaries(a, *t, records);
  }
  if (auto t = csv("top_models.csv")) {
    Auditor a{report, "tables/top_models.csv"};
    audit_top(a, *t, records, bundle.top_config, bundle.top_k);
  }
  if (auto t = csv("degradation.csv")) {
    Auditor a{report, "tables/degradation.csv"};
    audit_degradation(a, *t, records);
  }
  if (auto t = csv("config_effects.csv")) {
    Auditor a{report, "tables/config_effects.csv"};
    audit_config_effects(a, *t, records);
  }
  if (auto t = csv("bias_census.csv")) {
    Auditor a{report, "tables/bias_census.csv"};
    audit_census(a, *t, records, bundle.top_config);
  }
  if (auto t = csv("comparisons.csv")) {
    Auditor a{report, "tables/comparisons.csv"};
    audit_comparisons(a, *t, bundle.comparisons);
  }
  const char* figures[3] = {"overall.svg", "memory.svg", "reasoning.svg"};
  for (int m = 0; m < 3; ++m) {
    const fs::path p = dir / "figures" / figures[m];
    if (!fs::exists(p)) continue;
    Auditor a{report, std::string("figures/") + figures[m]};
    audit_figure(a, read_file(p), m, records);
  }

  report.ok = report.problems.empty();
  return report;
}

}  // namespace mcdrop::report
