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
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcdrop/model.hpp"

namespace mcdrop {

enum class Domain { kMemory, kReasoning };

std::string to_string(Domain domain);
Domain domain_from_string(std::string_view s);

/// One binary-classification item: is `candidate` the right answer /
/// continuation for `premise`?
struct Sample {
  std::string id;
  Domain domain = Domain::kMemory;
  std::string premise;
  std::string candidate;
  bool label = false;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetSplit {
  std::vector<Sample> train;
  std::vector<Sample> test;
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Synthetic generators. Both require an even count and produce exactly n/2
// positives and n/2 negatives.

/// Fact-extraction items over a synthetic fact table: the premise is a
/// context stating one fact among filler sentences, followed by a question
/// about that fact's entity; the candidate is the stored value (positive) or
/// the value stored under a different key (negative).
std::vector<Sample> gen_memory(std::size_t n, std::uint64_t seed);

/// Event-continuation items over templated multi-step scripts: the premise
/// is an agent performing a prefix of a script; the candidate is the next
/// step (positive) or a step that breaks the script (negative).
std::vector<Sample> gen_reasoning(std::size_t n, std::uint64_t seed);

/// gen_memory(per_domain) followed by gen_reasoning(per_domain), with
/// per-domain seeds derived from `seed`.
std::vector<Sample> generate_corpus(std::size_t per_domain, std::uint64_t seed);

/// The script table used by gen_reasoning (exposed for construction checks).
const std::vector<std::vector<std::string>>& reasoning_scripts();

// ---------------------------------------------------------------------------
// Converters for external QA / continuation data.

inline constexpr std::size_t kMemoryTextLimit = 200;

struct QaItem {
  std::string id;
  std::string question;
  std::string context;
  std::string answer;
};

/// One positive (question + correct answer) and one negative (question + an
/// answer drawn from a different item, never equal to the correct one) per
/// item. Questions longer than kMemoryTextLimit characters are dropped and
/// contexts are cut to kMemoryTextLimit characters.
std::vector<Sample> convert_qa(const std::vector<QaItem>& items, std::uint64_t seed);

struct ContinuationItem {
  std::string id;
  std::string context;
  std::vector<std::string> endings;
  std::size_t gold = 0;
};

/// Gold continuation as the positive, one uniformly drawn wrong ending as the
/// negative.
std::vector<Sample> convert_continuations(const std::vector<ContinuationItem>& items,
                                          std::uint64_t seed);

// ---------------------------------------------------------------------------
// Line-delimited ingestion format:
//   {"format_version":1}
//   {"id":"...","domain":"memory|reasoning","premise":"...","candidate":"...","label":true}

inline constexpr int kSampleFormatVersion = 1;

std::vector<Sample> ingest(const std::filesystem::path& path,
                           int format_version = kSampleFormatVersion);
std::vector<Sample> parse_samples(const std::string& text, const std::string& source = "<memory>",
                                  int format_version = kSampleFormatVersion);
std::string serialize_samples(const std::vector<Sample>& samples);

// ---------------------------------------------------------------------------

/// Stratified by domain. Per domain, floor(count * (1 - fraction)) samples
/// go to test and the rest to train.
DatasetSplit split(const std::vector<Sample>& samples, double fraction = 0.8,
                   std::uint64_t seed = 42);

// ---------------------------------------------------------------------------
// Tokenization.

/// Lowercases ASCII, splits on whitespace, and emits each punctuation
/// character as its own token.
std::vector<std::string> tokenize_text(std::string_view text);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kCls = 2;
  static constexpr std::int32_t kSep = 3;

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> tokens);
  /// Tokens of all samples, sorted, after the four special tokens.
  static Vocabulary build(const std::vector<Sample>& samples);

  std::int32_t id(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Rows of [CLS] premise [SEP] candidate [SEP], padded to seq_len. When too
/// long, premise tokens are dropped from the front.
struct TokenMatrix {
  std::size_t rows = 0;
  std::size_t seq_len = 0;
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> valid;
  std::vector<int> labels;
  std::vector<Domain> domains;

  /// Rows [begin, end) trimmed to their longest valid length.
  TokenBatch batch(std::size_t begin, std::size_t end) const;
  TokenBatch batch(const std::vector<std::size_t>& rows) const;
};

TokenMatrix encode(const std::vector<Sample>& samples, const Vocabulary& vocab,
                   std::size_t max_seq_len);

struct TokenizedSplit {
  Vocabulary vocab;
  TokenMatrix train;
  TokenMatrix test;
};

/// Vocabulary from the train split only; test tokens outside it map to kUnk.
TokenizedSplit tokenize(const DatasetSplit& split, std::size_t max_seq_len);

}  // namespace mcdrop
