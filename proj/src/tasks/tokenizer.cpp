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
#include <cctype>
#include <set>
#include <stdexcept>

#include "mcdrop/tasks.hpp"

namespace mcdrop {

std::vector<std::string> tokenize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
  }
  flush();
  return tokens;
}

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  const std::vector<std::string> specials{"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  if (tokens.size() < specials.size() ||
      !std::equal(specials.begin(), specials.end(), tokens.begin())) {
    tokens.insert(tokens.begin(), specials.begin(), specials.end());
  }
  tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<std::int32_t>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(const std::vector<Sample>& samples) {
  if (samples.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty corpus");
  std::set<std::string> words;
  for (const auto& s : samples) {
    for (auto& t : tokenize_text(s.premise)) words.insert(std::move(t));
    for (auto& t : tokenize_text(s.candidate)) words.insert(std::move(t));
  }
  return Vocabulary(std::vector<std::string>(words.begin(), words.end()));
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("token id out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenMatrix encode(const std::vector<Sample>& samples, const Vocabulary& vocab,
                   std::size_t max_seq_len) {
  if (max_seq_len < 4) throw std::invalid_argument("max_seq_len must be at least 4");
  TokenMatrix m;
  m.rows = samples.size();
  m.seq_len = max_seq_len;
  m.ids.assign(m.rows * max_seq_len, Vocabulary::kPad);
  m.valid.assign(m.rows * max_seq_len, 0);
  for (std::size_t r = 0; r < samples.size(); ++r) {
    std::vector<std::int32_t> premise, candidate;
    for (const auto& t : tokenize_text(samples[r].premise)) premise.push_back(vocab.id(t));
    for (const auto& t : tokenize_text(samples[r].candidate)) candidate.push_back(vocab.id(t));
    // Candidate keeps at most half the budget; the premise loses tokens from the front.
    const std::size_t budget = max_seq_len - 3;
    if (candidate.size() > budget / 2 && candidate.size() + premise.size() > budget) {
      candidate.resize(std::max(budget / 2, budget - std::min(budget, premise.size())));
    }
    if (premise.size() + candidate.size() > budget) {
      premise.erase(premise.begin(), premise.begin() + static_cast<std::ptrdiff_t>(
                                                            premise.size() + candidate.size() - budget));
    }
    std::vector<std::int32_t> row{Vocabulary::kCls};
    row.insert(row.end(), premise.begin(), premise.end());
    row.push_back(Vocabulary::kSep);
    row.insert(row.end(), candidate.begin(), candidate.end());
    row.push_back(Vocabulary::kSep);
    std::copy(row.begin(), row.end(), m.ids.begin() + static_cast<std::ptrdiff_t>(r * max_seq_len));
    std::fill_n(m.valid.begin() + static_cast<std::ptrdiff_t>(r * max_seq_len), row.size(), 1);
    m.labels.push_back(samples[r].label ? 1 : 0);
    m.domains.push_back(samples[r].domain);
  }
  return m;
}

TokenBatch TokenMatrix::batch(const std::vector<std::size_t>& rows_wanted) const {
  TokenBatch b;
  b.batch = rows_wanted.size();
  std::size_t longest = 1;
  for (auto r : rows_wanted) {
    if (r >= rows) throw std::out_of_range("token matrix row out of range");
    for (std::size_t i = 0; i < seq_len; ++i) {
      if (valid[r * seq_len + i]) longest = std::max(longest, i + 1);
    }
  }
  b.seq_len = longest;
  for (auto r : rows_wanted) {
    b.ids.insert(b.ids.end(), ids.begin() + static_cast<std::ptrdiff_t>(r * seq_len),
                 ids.begin() + static_cast<std::ptrdiff_t>(r * seq_len + longest));
    b.valid.insert(b.valid.end(), valid.begin() + static_cast<std::ptrdiff_t>(r * seq_len),
                   valid.begin() + static_cast<std::ptrdiff_t>(r * seq_len + longest));
  }
  return b;
}

TokenBatch TokenMatrix::batch(std::size_t begin, std::size_t end) const {
  std::vector<std::size_t> r;
  for (std::size_t i = begin; i < end; ++i) r.push_back(i);
  return batch(r);
}

TokenizedSplit tokenize(const DatasetSplit& split, std::size_t max_seq_len) {
  TokenizedSplit out;
  out.vocab = Vocabulary::build(split.train);
  out.train = encode(split.train, out.vocab, max_seq_len);
  out.test = encode(split.test, out.vocab, max_seq_len);
  return out;
}

}  // namespace mcdrop
