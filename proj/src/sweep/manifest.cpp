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

#include <charconv>
#include <stdexcept>

#include "mcdrop/rng.hpp"
#include "mcdrop/sweep.hpp"

namespace mcdrop {

namespace {

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::size_t parse_count(std::string_view s, std::string_view what, std::string_view spec) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) {
    throw std::invalid_argument("model spec '" + std::string(spec) + "': " + std::string(what) +
                                " must be a positive integer");
  }
  return v;
}

json dropout_json(const DropoutConfig& d) {
  return {{"record", "dropout"},
          {"name", d.name},
          {"attention_rate", d.attention_rate},
          {"ffn_rate", d.ffn_rate}};
}

}  // namespace

ModelSpec parse_model_spec(std::string_view text) {
  const auto parts = split_on(trim(text), ':');
  if (parts.size() != 6 && parts.size() != 7) {
    throw std::invalid_argument("model spec '" + std::string(text) +
                                "' must be name:family:layers:heads:d_model:d_ffn[:pooling]");
  }
  ModelSpec spec;
  spec.name = std::string(parts[0]);
  if (spec.name.empty() || spec.name.find_first_of("/\\ ,") != std::string::npos) {
    throw std::invalid_argument("model spec '" + std::string(text) + "': invalid model name");
  }
  spec.config.family = family_from_string(parts[1]);
  spec.config.layers = parse_count(parts[2], "layers", text);
  spec.config.heads = parse_count(parts[3], "heads", text);
  spec.config.d_model = parse_count(parts[4], "d_model", text);
  spec.config.d_ffn = parse_count(parts[5], "d_ffn", text);
  spec.config.pooling =
      parts.size() == 7 ? pooling_from_string(parts[6]) : default_pooling(spec.config.family);
  return spec;
}

std::string format_model_spec(const ModelSpec& s) {
  const auto& c = s.config;
  return s.name + ":" + to_string(c.family) + ":" + std::to_string(c.layers) + ":" +
         std::to_string(c.heads) + ":" + std::to_string(c.d_model) + ":" +
         std::to_string(c.d_ffn) + ":" + to_string(c.pooling);
}

std::vector<ModelSpec> parse_model_specs(std::string_view text) {
  std::vector<ModelSpec> out;
  for (auto part : split_on(text, ',')) {
    if (!trim(part).empty()) out.push_back(parse_model_spec(part));
  }
  if (out.empty()) throw std::invalid_argument("no model specs given");
  return out;
}

std::vector<DropoutConfig> parse_dropout_list(std::string_view text) {
  std::vector<DropoutConfig> out;
  for (auto part : split_on(text, ',')) {
    const auto name = trim(part);
    if (name.empty()) continue;
    auto preset = find_dropout_preset(name);
    if (!preset) throw std::invalid_argument("unknown dropout config '" + std::string(name) + "'");
    out.push_back(*preset);
  }
  if (out.empty()) throw std::invalid_argument("no dropout configs given");
  return out;
}

std::string to_string(CellStatus status) {
  switch (status) {
    case CellStatus::kPending: return "pending";
    case CellStatus::kTrained: return "trained";
    case CellStatus::kEvaluated: return "evaluated";
    case CellStatus::kFailed: return "failed";
  }
  return "pending";
}

CellStatus cell_status_from_string(std::string_view s) {
  if (s == "pending") return CellStatus::kPending;
  if (s == "trained") return CellStatus::kTrained;
  if (s == "evaluated") return CellStatus::kEvaluated;
  if (s == "failed") return CellStatus::kFailed;
  throw std::invalid_argument("unknown cell status '" + std::string(s) + "'");
}

std::uint64_t cell_seed(std::uint64_t sweep_seed, std::string_view model, std::string_view config) {
  // FNV-1a over "model\0config", folded into the sweep seed.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  feed(model);
  feed(std::string_view("\0", 1));
  feed(config);
  return mix64(mix64(sweep_seed) ^ h);
}

void SweepManifest::reset_cells() {
  cells.clear();
  for (const auto& m : models) {
    for (const auto& d : dropout_configs) {
      SweepCell c;
      c.model = m.name;
      c.config = d.name;
      c.mc_seed = cell_seed(seeds.mc, m.name, d.name);
      c.matrix = "raw/matrices/" + m.name + "__" + d.name + ".jsonl";
      cells.push_back(std::move(c));
    }
  }
}

void SweepManifest::validate() const {
  if (sweep_id.empty() || sweep_id.find_first_of("/\\") != std::string::npos) {
    throw std::invalid_argument("sweep_id must be a non-empty folder name");
  }
  if (models.empty()) throw std::invalid_argument("manifest lists no models");
  if (dropout_configs.empty()) throw std::invalid_argument("manifest lists no dropout configs");
  if (passes == 0) throw std::invalid_argument("passes must be at least 1");
  if (eval_batch == 0) throw std::invalid_argument("eval_batch must be at least 1");
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (models[i].name == models[j].name) {
        throw std::invalid_argument("duplicate model name '" + models[i].name + "'");
      }
    }
  }
  for (std::size_t i = 0; i < dropout_configs.size(); ++i) {
    dropout_configs[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (dropout_configs[i].name == dropout_configs[j].name) {
        throw std::invalid_argument("duplicate dropout config '" + dropout_configs[i].name + "'");
      }
    }
  }
  training.validate();
  if (cells.size() != models.size() * dropout_configs.size()) {
    throw std::invalid_argument("cell grid does not match models x dropout configs");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& m = models[i / dropout_configs.size()];
    const auto& d = dropout_configs[i % dropout_configs.size()];
    if (cells[i].model != m.name || cells[i].config != d.name) {
      throw std::invalid_argument("cell " + std::to_string(i) + " is out of grid order");
    }
  }
}

SweepCell& SweepManifest::cell(const std::string& model, const std::string& config) {
  for (auto& c : cells) {
    if (c.model == model && c.config == config) return c;
  }
  throw std::out_of_range("no cell " + model + "/" + config);
}

std::string serialize_manifest(const SweepManifest& m) {
  std::string out = jsonl_line(json{{"record", "sweep_manifest"},
                                    {"format_version", kManifestFormatVersion}});
  const auto& t = m.training;
  out += jsonl_line(json{
      {"record", "settings"},
      {"sweep_id", m.sweep_id},
      {"passes", m.passes},
      {"eval_batch", m.eval_batch},
      {"seeds",
       {{"data", m.seeds.data}, {"init", m.seeds.init}, {"training", m.seeds.training}, {"mc", m.seeds.mc}}},
      {"corpus",
       {{"ingest_path", m.corpus.ingest_path},
        {"per_domain", m.corpus.per_domain},
        {"train_fraction", m.corpus.train_fraction}}},
      {"training",
       {{"learning_rate", t.learning_rate},
        {"warmup_fraction", t.warmup_fraction},
        {"epochs", t.epochs},
        {"train_batch", t.train_batch},
        {"eval_batch", t.eval_batch},
        {"clip_norm", t.clip_norm},
        {"weight_decay", t.weight_decay},
        {"train_dropout", t.train_dropout.name},
        {"train_attention_rate", t.train_dropout.attention_rate},
        {"train_ffn_rate", t.train_dropout.ffn_rate},
        {"beta1", t.beta1},
        {"beta2", t.beta2},
        {"adam_eps", t.adam_eps}}}});
  for (const auto& spec : m.models) {
    out += jsonl_line(json{{"record", "model"}, {"spec", format_model_spec(spec)}});
  }
  for (const auto& d : m.dropout_configs) out += jsonl_line(dropout_json(d));
  for (const auto& c : m.cells) {
    out += jsonl_line(json{{"record", "cell"},
                           {"model", c.model},
                           {"config", c.config},
                           {"status", to_string(c.status)},
                           {"mc_seed", c.mc_seed},
                           {"matrix", c.matrix},
                           {"checkpoint_digest", c.checkpoint_digest},
                           {"error", c.error}});
  }
  return out;
}

SweepManifest parse_manifest(const std::string& text, const std::string& source) {
  const auto lines = parse_jsonl(text, source);
  if (lines.empty()) throw ParseError(source, 1, 1, "empty manifest");
  SweepManifest m;
  m.dropout_configs.clear();
  bool have_settings = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto& j = line.value;
    try {
      const auto record = j.at("record").get<std::string>();
      if (i == 0) {
        if (record != "sweep_manifest") throw std::invalid_argument("first record must be the header");
        const int version = j.at("format_version").get<int>();
        if (version != kManifestFormatVersion) {
          throw std::invalid_argument("unsupported format_version " + std::to_string(version));
        }
      } else if (record == "settings") {
        m.sweep_id = j.at("sweep_id").get<std::string>();
        m.passes = j.at("passes").get<std::size_t>();
        m.eval_batch = j.at("eval_batch").get<std::size_t>();
        const auto& s = j.at("seeds");
        m.seeds = {s.at("data").get<std::uint64_t>(), s.at("init").get<std::uint64_t>(),
                   s.at("training").get<std::uint64_t>(), s.at("mc").get<std::uint64_t>()};
        const auto& c = j.at("corpus");
        m.corpus = {c.at("ingest_path").get<std::string>(), c.at("per_domain").get<std::size_t>(),
                    c.at("train_fraction").get<double>()};
        const auto& t = j.at("training");
        auto& tc = m.training;
        tc.learning_rate = t.at("learning_rate").get<Real>();
        tc.warmup_fraction = t.at("warmup_fraction").get<Real>();
        tc.epochs = t.at("epochs").get<std::size_t>();
        tc.train_batch = t.at("train_batch").get<std::size_t>();
        tc.eval_batch = t.at("eval_batch").get<std::size_t>();
        tc.clip_norm = t.at("clip_norm").get<Real>();
        tc.weight_decay = t.at("weight_decay").get<Real>();
        tc.train_dropout = {t.at("train_dropout").get<std::string>(),
                            t.at("train_attention_rate").get<Real>(),
                            t.at("train_ffn_rate").get<Real>()};
        tc.beta1 = t.at("beta1").get<Real>();
        tc.beta2 = t.at("beta2").get<Real>();
        tc.adam_eps = t.at("adam_eps").get<Real>();
        tc.seed = m.seeds.training;
        have_settings = true;
      } else if (record == "model") {
        m.models.push_back(parse_model_spec(j.at("spec").get<std::string>()));
      } else if (record == "dropout") {
        m.dropout_configs.push_back({j.at("name").get<std::string>(),
                                     j.at("attention_rate").get<Real>(),
                                     j.at("ffn_rate").get<Real>()});
      } else if (record == "cell") {
        SweepCell c;
        c.model = j.at("model").get<std::string>();
        c.config = j.at("config").get<std::string>();
        c.status = cell_status_from_string(j.at("status").get<std::string>());
        c.mc_seed = j.at("mc_seed").get<std::uint64_t>();
        c.matrix = j.at("matrix").get<std::string>();
        c.checkpoint_digest = j.at("checkpoint_digest").get<std::string>();
        c.error = j.at("error").get<std::string>();
        m.cells.push_back(std::move(c));
      } else {
        throw std::invalid_argument("unknown record '" + record + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(source, line.line_number, 1, e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, line.line_number, 1, e.what());
    }
  }
  if (!have_settings) throw ParseError(source, lines.back().line_number, 1, "no settings record");
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(source + ": " + e.what());
  }
  return m;
}

void save_manifest(const SweepManifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_manifest(manifest));
}

SweepManifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path), path.string());
}

SweepManifest full_grid_manifest() {
  SweepManifest m;
  m.sweep_id = "full-grid";
  // Encoders vary depth and width; decoders likewise, all at toolkit scale.
  const char* encoders[] = {
      "enc-01:encoder:2:2:16:32",  "enc-02:encoder:2:2:32:64",  "enc-03:encoder:4:2:32:64",
      "enc-04:encoder:4:4:32:64",  "enc-05:encoder:4:2:48:96",  "enc-06:encoder:6:2:32:64",
      "enc-07:encoder:6:4:48:96",  "enc-08:encoder:3:2:32:128", "enc-09:encoder:4:2:32:64:mean",
      "enc-10:encoder:2:4:64:128", "enc-11:encoder:1:2:32:64",  "enc-12:encoder:8:2:32:64",
      "enc-13:encoder:4:4:64:64",  "enc-14:encoder:3:2:24:48"};
  const char* decoders[] = {"dec-01:decoder:2:2:32:64", "dec-02:decoder:4:2:32:64",
                            "dec-03:decoder:4:4:48:96", "dec-04:decoder:6:2:32:64",
                            "dec-05:decoder:3:2:16:32"};
  for (const char* s : encoders) m.models.push_back(parse_model_spec(s));
  for (const char* s : decoders) m.models.push_back(parse_model_spec(s));
  m.reset_cells();
  return m;
}

SweepManifest desk_scale_manifest() {
  SweepManifest m;
  m.sweep_id = "desk";
  m.models = {parse_model_spec("encoder-4l:encoder:4:2:32:64"),
              parse_model_spec("decoder-4l:decoder:4:2:32:64")};
  m.training.learning_rate = Real(1e-3);
  m.reset_cells();
  return m;
}

}  // namespace mcdrop
