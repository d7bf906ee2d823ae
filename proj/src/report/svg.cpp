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
#include <cstdio>
#include <map>

#include "mcdrop/report.hpp"

namespace mcdrop::report {

namespace {

constexpr const char* kDeterministicColor = "#1f77b4";
constexpr const char* kBaselineColor = "#ff7f0e";

constexpr double kLeft = 70, kTop = 50, kPlotHeight = 260, kGroupWidth = 120;
constexpr double kBarWidth = 36, kCapHalf = 6, kRight = 150, kBottom = 110;

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Comment bodies may not contain "--".
std::string comment_safe(std::string s) {
  for (std::size_t i = s.find("--"); i != std::string::npos; i = s.find("--", i)) {
    s.replace(i, 2, "-_");
  }
  return s;
}

double y_of(double value) { return kTop + kPlotHeight * (1.0 - value); }

struct Bar {
  std::string model;
  double det_mean, det_std, base_mean, base_std;
};

struct Metric {
  const char* file;
  const char* title;
  const char* axis;
};

bool metric_values(const RunSummary& s, int metric, double& mean, double& sd) {
  switch (metric) {
    case 0:
      mean = s.mean_overall;
      sd = s.std_overall;
      return true;
    case 1:
      if (!s.mean_memory || !s.std_memory) return false;
      mean = *s.mean_memory;
      sd = *s.std_memory;
      return true;
    default:
      if (!s.mean_reasoning || !s.std_reasoning) return false;
      mean = *s.mean_reasoning;
      sd = *s.std_reasoning;
      return true;
  }
}

std::string render_chart(const ReportBundle& b, const Metric& metric, const std::vector<Bar>& bars) {
  const double width = kLeft + kGroupWidth * static_cast<double>(std::max<std::size_t>(bars.size(), 1)) + kRight;
  const double height = kTop + kPlotHeight + kBottom;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(width) + "\" height=\"" +
       coord(height) + "\" viewBox=\"0 0 " + coord(width) + " " + coord(height) + "\">\n";
  o += "<!-- data\n";
  o += "sweep," + comment_safe(b.sweep_id) + "\n";
  o += "model,series,mean,std\n";
  for (const auto& bar : bars) {
    o += comment_safe(bar.model) + ",deterministic," + fmt_exact(bar.det_mean) + "," +
         fmt_exact(bar.det_std) + "\n";
    o += comment_safe(bar.model) + ",baseline," + fmt_exact(bar.base_mean) + "," +
         fmt_exact(bar.base_std) + "\n";
  }
  o += "-->\n";
  o += "<rect x=\"0\" y=\"0\" width=\"" + coord(width) + "\" height=\"" + coord(height) +
       "\" fill=\"#ffffff\"/>\n";
  o += "<text x=\"" + coord(width / 2) + "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
       escape(metric.title) + "</text>\n";

  // Axes and gridlines at 0.2 steps.
  const double x_end = width - kRight + 20;
  for (int i = 0; i <= 5; ++i) {
    const double v = 0.2 * i;
    const double y = y_of(v);
    o += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(y) + "\" x2=\"" + coord(x_end) +
         "\" y2=\"" + coord(y) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    char label[8];
    std::snprintf(label, sizeof label, "%.1f", v);
    o += "<text x=\"" + coord(kLeft - 8) + "\" y=\"" + coord(y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label + "</text>\n";
  }
  o += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(kTop) + "\" x2=\"" + coord(kLeft) +
       "\" y2=\"" + coord(y_of(0)) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  o += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(y_of(0)) + "\" x2=\"" + coord(x_end) +
       "\" y2=\"" + coord(y_of(0)) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
  o += "<text x=\"18\" y=\"" + coord(kTop + kPlotHeight / 2) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 " +
       coord(kTop + kPlotHeight / 2) + ")\">" + escape(metric.axis) + "</text>\n";

  for (std::size_t i = 0; i < bars.size(); ++i) {
    const auto& bar = bars[i];
    const double group_x = kLeft + kGroupWidth * static_cast<double>(i);
    const struct {
      const char* series;
      const char* color;
      double mean, sd, x;
    } pair[2] = {{"deterministic", kDeterministicColor, bar.det_mean, bar.det_std, group_x + 20},
                 {"baseline", kBaselineColor, bar.base_mean, bar.base_std, group_x + 20 + kBarWidth + 8}};
    for (const auto& p : pair) {
      const double bar_height = kPlotHeight * p.mean;
      const double top = y_of(0) - bar_height;
      o += "<rect x=\"" + coord(p.x) + "\" y=\"" + coord(top) + "\" width=\"" + coord(kBarWidth) +
           "\" height=\"" + coord(bar_height) + "\" fill=\"" + p.color + "\" data-model=\"" +
           escape(bar.model) + "\" data-series=\"" + p.series + "\" data-mean=\"" +
           fmt_exact(p.mean) + "\" data-std=\"" + fmt_exact(p.sd) + "\"/>\n";
      const double cx = p.x + kBarWidth / 2;
      const double lo = y_of(p.mean - p.sd), hi = y_of(p.mean + p.sd);
      o += "<line x1=\"" + coord(cx) + "\" y1=\"" + coord(lo) + "\" x2=\"" + coord(cx) +
           "\" y2=\"" + coord(hi) + "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
      for (double y : {lo, hi}) {
        o += "<line x1=\"" + coord(cx - kCapHalf) + "\" y1=\"" + coord(y) + "\" x2=\"" +
             coord(cx + kCapHalf) + "\" y2=\"" + coord(y) +
             "\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";
      }
    }
    const double label_x = group_x + 20 + kBarWidth + 4;
    const double label_y = y_of(0) + 14;
    o += "<text x=\"" + coord(label_x) + "\" y=\"" + coord(label_y) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" transform=\"rotate(-30 " +
         coord(label_x) + " " + coord(label_y) + ")\">" + escape(bar.model) + "</text>\n";
  }

  // Legend.
  const double lx = width - kRight + 30;
  const struct {
    const char* color;
    const char* label;
  } legend[2] = {{kDeterministicColor, "Deterministic"}, {kBaselineColor, "Baseline MC Dropout"}};
  for (int i = 0; i < 2; ++i) {
    const double ly = kTop + 20.0 * i;
    o += "<rect x=\"" + coord(lx) + "\" y=\"" + coord(ly) + "\" width=\"12\" height=\"12\" fill=\"" +
         legend[i].color + "\"/>\n";
    o += "<text x=\"" + coord(lx + 16) + "\" y=\"" + coord(ly + 10) +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + legend[i].label + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace

std::vector<Document> render_figures(const ReportBundle& b) {
  std::map<std::string, const SummaryRecord*> det, base;
  for (const auto& r : b.summaries) {
    if (r.config == "deterministic") det[r.model_id] = &r;
    if (r.config == "baseline") base[r.model_id] = &r;
  }
  const Metric metrics[3] = {
      {"overall.svg", "Overall accuracy: deterministic vs baseline MC dropout", "Overall accuracy"},
      {"memory.svg", "Memory task accuracy: deterministic vs baseline MC dropout", "Memory accuracy"},
      {"reasoning.svg", "Reasoning task accuracy: deterministic vs baseline MC dropout",
       "Reasoning accuracy"}};

  std::vector<Document> docs;
  for (int m = 0; m < 3; ++m) {
    std::vector<Bar> bars;
    for (const auto& e : b.degradation_table.entries) {
      if (bars.size() == b.figure_models) break;
      Bar bar{e.model_id, 0, 0, 0, 0};
      if (!metric_values(det.at(e.model_id)->summary, m, bar.det_mean, bar.det_std) ||
          !metric_values(base.at(e.model_id)->summary, m, bar.base_mean, bar.base_std)) {
        continue;
      }
      bars.push_back(bar);
    }
    docs.push_back({metrics[m].file, render_chart(b, metrics[m], bars)});
  }
  return docs;
}

}  // namespace mcdrop::report
