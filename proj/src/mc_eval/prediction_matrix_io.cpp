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

#include <stdexcept>

#include "mcdrop/mc_eval.hpp"

namespace mcdrop {

namespace {

json dropout_to_json(const DropoutConfig& d) {
  return {{"name", d.name}, {"attention_rate", d.attention_rate}, {"ffn_rate", d.ffn_rate}};
}

DropoutConfig dropout_from_json(const json& j) {
  DropoutConfig d{j.at("name").get<std::string>(), j.at("attention_rate").get<Real>(),
                  j.at("ffn_rate").get<Real>()};
  d.validate();
  return d;
}

template <typename T>
T field(const JsonLine& line, const char* name, const std::string& source) {
  try {
    return line.value.at(name).get<T>();
  } catch (const json::exception&) {
    throw ParseError(source, line.line_number, 1,
                     std::string("missing or mistyped field '") + name + "'");
  }
}

void expect_record(const JsonLine& line, const char* kind, const std::string& source) {
  if (field<std::string>(line, "record", source) != kind) {
    throw ParseError(source, line.line_number, 1, std::string("expected a '") + kind + "' record");
  }
}

json optional_real(const std::optional<double>& v) { return v ? real_to_json(*v) : json(nullptr); }

std::optional<double> optional_from_json(const json& j, const char* name) {
  if (!j.contains(name) || j.at(name).is_null()) return std::nullopt;
  return real_from_json(j.at(name));
}

}  // namespace

std::string serialize_prediction_matrix(const PredictionMatrix& pm) {
  const std::size_t n = pm.sample_count();
  std::string out = jsonl_line(json{{"record", "prediction_matrix"},
                                    {"format_version", kPredictionMatrixFormatVersion},
                                    {"passes", pm.passes},
                                    {"samples", n},
                                    {"dropout", dropout_to_json(pm.dropout)},
                                    {"mode", to_string(pm.mode)},
                                    {"base_seed", pm.base_seed},
                                    {"eval_batch", pm.eval_batch},
                                    {"checkpoint_digest", pm.checkpoint_digest}});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = pm.samples[i];
    out += jsonl_line(json{{"record", "sample"},
                           {"index", i},
                           {"id", s.id},
                           {"domain", to_string(s.domain)},
                           {"label", s.label}});
  }
  for (std::size_t m = 0; m < pm.passes; ++m) {
    std::string bits(n, '0');
    json probs = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      if (pm.prediction(m, i)) bits[i] = '1';
      probs.push_back(pm.probability(m, i));
    }
    out += jsonl_line(json{{"record", "pass"},
                           {"pass", m},
                           {"stream_id", m},
                           {"predictions", bits},
                           {"probabilities", std::move(probs)}});
  }
  return out;
}

ParsedMatrix parse_prediction_matrix(const std::string& text, const std::string& source) {
  const auto lines = parse_jsonl(text, source);
  if (lines.empty()) throw ParseError(source, 1, 1, "empty prediction matrix file");

  ParsedMatrix parsed;
  PredictionMatrix& pm = parsed.matrix;
  const auto& header = lines.front();
  expect_record(header, "prediction_matrix", source);
  const int version = field<int>(header, "format_version", source);
  if (version != kPredictionMatrixFormatVersion) {
    throw ParseError(source, header.line_number, 1,
                     "unsupported format_version " + std::to_string(version));
  }
  pm.passes = field<std::size_t>(header, "passes", source);
  const auto n = field<std::size_t>(header, "samples", source);
  try {
    pm.dropout = dropout_from_json(header.value.at("dropout"));
    pm.mode = inference_mode_from_string(field<std::string>(header, "mode", source));
  } catch (const std::invalid_argument& e) {
    throw ParseError(source, header.line_number, 1, e.what());
  } catch (const json::exception&) {
    throw ParseError(source, header.line_number, 1, "malformed 'dropout' field");
  }
  pm.base_seed = field<std::uint64_t>(header, "base_seed", source);
  pm.eval_batch = field<std::size_t>(header, "eval_batch", source);
  pm.checkpoint_digest = field<std::string>(header, "checkpoint_digest", source);
  if (pm.passes == 0 || n == 0) {
    throw ParseError(source, header.line_number, 1, "passes and samples must be at least 1");
  }
  if (lines.size() != 1 + n + pm.passes) {
    throw ParseError(source, lines.back().line_number, 1,
                     "expected " + std::to_string(1 + n + pm.passes) + " records, found " +
                         std::to_string(lines.size()));
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& line = lines[1 + i];
    expect_record(line, "sample", source);
    if (field<std::size_t>(line, "index", source) != i) {
      throw ParseError(source, line.line_number, 1, "sample records out of order");
    }
    SampleMeta meta;
    meta.id = field<std::string>(line, "id", source);
    try {
      meta.domain = domain_from_string(field<std::string>(line, "domain", source));
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line.line_number, 1, e.what());
    }
    meta.label = field<bool>(line, "label", source);
    pm.samples.push_back(std::move(meta));
  }

  pm.predictions.reserve(pm.passes * n);
  pm.probabilities.reserve(pm.passes * n);
  for (std::size_t m = 0; m < pm.passes; ++m) {
    const auto& line = lines[1 + n + m];
    expect_record(line, "pass", source);
    if (field<std::size_t>(line, "pass", source) != m) {
      throw ParseError(source, line.line_number, 1, "pass records out of order");
    }
    if (field<std::uint64_t>(line, "stream_id", source) != m) {
      parsed.warnings.push_back("pass " + std::to_string(m) + ": stream_id differs from pass index");
    }
    const auto bits = field<std::string>(line, "predictions", source);
    const auto probs = field<std::vector<double>>(line, "probabilities", source);
    if (bits.size() != n || probs.size() != n) {
      throw ParseError(source, line.line_number, 1, "pass row length does not match sample count");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (bits[i] != '0' && bits[i] != '1') {
        throw ParseError(source, line.line_number, 1, "predictions must be a string of 0/1");
      }
      pm.predictions.push_back(bits[i] == '1');
      pm.probabilities.push_back(probs[i]);
    }
  }
  auto issues = pm.check_invariants();
  parsed.warnings.insert(parsed.warnings.end(), issues.begin(), issues.end());
  return parsed;
}

void save_prediction_matrix(const PredictionMatrix& pm, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_prediction_matrix(pm));
}

ParsedMatrix load_prediction_matrix(const std::filesystem::path& path) {
  return parse_prediction_matrix(read_file(path), path.string());
}

json summary_to_json(const SummaryRecord& r) {
  const auto& s = r.summary;
  return {{"record", "run_summary"},
          {"model", r.model_id},
          {"family", r.family},
          {"config", r.config},
          {"mean_overall", real_to_json(s.mean_overall)},
          {"std_overall", real_to_json(s.std_overall)},
          {"mean_memory", optional_real(s.mean_memory)},
          {"std_memory", optional_real(s.std_memory)},
          {"mean_reasoning", optional_real(s.mean_reasoning)},
          {"std_reasoning", optional_real(s.std_reasoning)},
          {"delta_cog", optional_real(s.delta_cog)},
          {"partial", s.partial()}};
}

SummaryRecord summary_from_json(const json& j) {
  SummaryRecord r;
  r.model_id = j.at("model").get<std::string>();
  r.family = j.value("family", std::string());
  r.config = j.at("config").get<std::string>();
  r.summary.mean_overall = real_from_json(j.at("mean_overall"));
  r.summary.std_overall = real_from_json(j.at("std_overall"));
  r.summary.mean_memory = optional_from_json(j, "mean_memory");
  r.summary.std_memory = optional_from_json(j, "std_memory");
  r.summary.mean_reasoning = optional_from_json(j, "mean_reasoning");
  r.summary.std_reasoning = optional_from_json(j, "std_reasoning");
  r.summary.delta_cog = optional_from_json(j, "delta_cog");
  return r;
}

std::string serialize_summaries(const std::vector<SummaryRecord>& records) {
  std::string out;
  for (const auto& r : records) out += jsonl_line(summary_to_json(r));
  return out;
}

std::vector<SummaryRecord> parse_summaries(const std::string& text, const std::string& source) {
  std::vector<SummaryRecord> out;
  for (const auto& line : parse_jsonl(text, source)) {
    if (line.value.value("record", std::string()) != "run_summary") continue;
    try {
      out.push_back(summary_from_json(line.value));
    } catch (const std::exception& e) {
      throw ParseError(source, line.line_number, 1, e.what());
    }
  }
  return out;
}

}  // namespace mcdrop
