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
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace mcdrop {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// Malformed input record. Carries the 1-based line and column when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, std::size_t line, std::size_t column, const std::string& what);

  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string file_;
  std::size_t line_;
  std::size_t column_;
};

/// Well-formed input whose content violates a record invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JsonLine {
  std::size_t line_number;
  json value;
};

/// Reads one JSON object per non-empty line.
std::vector<JsonLine> read_jsonl(const std::filesystem::path& path);
std::vector<JsonLine> parse_jsonl(const std::string& text, const std::string& source = "<memory>");

/// Compact single-line serialization with a trailing newline.
std::string jsonl_line(const json& value);

/// Writes to a sibling temp file then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// JSON number for finite values, "inf"/"-inf"/"nan" strings otherwise.
json real_to_json(double v);
double real_from_json(const json& v);

}  // namespace mcdrop
