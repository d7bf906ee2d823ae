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

#include <set>
#include <unordered_map>

#include "mcdrop/jsonl.hpp"
#include "mcdrop/tasks.hpp"

namespace mcdrop {

namespace {

const std::set<std::string> kSampleFields{"id", "domain", "premise", "candidate", "label"};

std::string required_string(const json& record, const char* field, const std::string& source,
                            std::size_t line) {
  const auto& v = record.at(field);
  if (!v.is_string()) throw ParseError(source, line, 1, std::string("field '") + field + "' must be a string");
  auto s = v.get<std::string>();
  if (s.empty()) throw ParseError(source, line, 1, std::string("field '") + field + "' must be non-empty");
  return s;
}

}  // namespace

std::vector<Sample> parse_samples(const std::string& text, const std::string& source,
                                  int format_version) {
  const auto lines = parse_jsonl(text, source);
  std::vector<Sample> out;
  if (lines.empty()) return out;

  const auto& header = lines.front();
  if (header.value.size() != 1 || !header.value.contains("format_version") ||
      !header.value["format_version"].is_number_integer()) {
    throw ParseError(source, header.line_number, 1,
                     "first record must be the header {\"format_version\": N}");
  }
  const int version = header.value["format_version"].get<int>();
  if (version != format_version) {
    throw ParseError(source, header.line_number, 1,
                     "format_version " + std::to_string(version) + " (expected " +
                         std::to_string(format_version) + ")");
  }

  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& [line, record] = lines[i];
    for (const auto& field : kSampleFields) {
      if (!record.contains(field)) {
        throw ParseError(source, line, 1, "missing field '" + field + "'");
      }
    }
    for (const auto& [key, value] : record.items()) {
      if (!kSampleFields.count(key)) throw ParseError(source, line, 1, "unexpected field '" + key + "'");
    }
    Sample s;
    s.id = required_string(record, "id", source, line);
    const auto domain = required_string(record, "domain", source, line);
    if (domain != "memory" && domain != "reasoning") {
      throw ParseError(source, line, 1, "domain must be \"memory\" or \"reasoning\"");
    }
    s.domain = domain_from_string(domain);
    s.premise = required_string(record, "premise", source, line);
    s.candidate = required_string(record, "candidate", source, line);
    if (!record["label"].is_boolean()) throw ParseError(source, line, 1, "field 'label' must be a boolean");
    s.label = record["label"].get<bool>();
    if (auto [it, inserted] = seen.emplace(s.id, line); !inserted) {
      throw ValidationError(source + ":" + std::to_string(line) + ": duplicate id '" + s.id +
                            "' (first seen on line " + std::to_string(it->second) + ")");
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Sample> ingest(const std::filesystem::path& path, int format_version) {
  return parse_samples(read_file(path), path.string(), format_version);
}

std::string serialize_samples(const std::vector<Sample>& samples) {
  std::string out = jsonl_line(json{{"format_version", kSampleFormatVersion}});
  for (const auto& s : samples) {
    ordered_json record;
    record["id"] = s.id;
    record["domain"] = to_string(s.domain);
    record["premise"] = s.premise;
    record["candidate"] = s.candidate;
    record["label"] = s.label;
    out += record.dump() + "\n";
  }
  return out;
}

}  // namespace mcdrop
