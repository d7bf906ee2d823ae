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
#include <set>
#include <stdexcept>

#include "mcdrop/rng.hpp"
#include "mcdrop/tasks.hpp"

namespace mcdrop {

std::string to_string(Domain domain) {
  return domain == Domain::kMemory ? "memory" : "reasoning";
}

Domain domain_from_string(std::string_view s) {
  if (s == "memory") return Domain::kMemory;
  if (s == "reasoning") return Domain::kReasoning;
  throw std::invalid_argument("unknown domain '" + std::string(s) + "'");
}

namespace {

std::size_t pick(std::mt19937_64& engine, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine);
}

template <typename T>
const T& pick_from(std::mt19937_64& engine, const std::vector<T>& items) {
  return items[pick(engine, items.size())];
}

std::string make_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s-%04zu", prefix, i);
  return buf;
}

void require_even(std::size_t n, const char* what) {
  if (n % 2 != 0) {
    throw std::invalid_argument(std::string(what) + ": sample count must be even, got " +
                                std::to_string(n));
  }
}

// Shuffles and assigns sequential ids.
std::vector<Sample> finalize(std::vector<Sample> samples, const char* prefix,
                             std::mt19937_64& engine) {
  std::shuffle(samples.begin(), samples.end(), engine);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].id = make_id(prefix, i);
  return samples;
}

// ---------------------------------------------------------------------------
// Memory

const std::vector<std::string> kSyllables{"zor", "vak", "lim", "tes", "qua", "bel", "dra",
                                          "nox", "pel", "rith", "sum", "kal", "mer", "tov",
                                          "yun", "fal", "gri", "hos", "jet", "wen"};
const std::vector<std::string> kRelations{"capital", "founder", "river", "emblem"};
const std::vector<std::string> kAdjectives{"green", "quiet", "northern", "old", "misty"};
const std::vector<std::string> kNouns{"markets", "harbors", "songs", "festivals", "roads"};

constexpr std::size_t kPlaceCount = 12;

struct Fact {
  std::string entity;
  std::size_t relation;
  std::string value;
};

std::vector<std::string> unique_words(std::mt19937_64& engine, std::size_t count,
                                      std::size_t syllables) {
  std::set<std::string> seen;
  std::vector<std::string> words;
  while (words.size() < count) {
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) w += pick_from(engine, kSyllables);
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

std::string distractor_sentence(std::mt19937_64& engine, const std::vector<std::string>& places) {
  const auto& e = pick_from(engine, places);
  switch (pick(engine, 4)) {
    case 0: return e + " lies beyond the " + pick_from(engine, kAdjectives) + " hills .";
    case 1: return "travelers visited " + e + " for its " + pick_from(engine, kNouns) + " .";
    case 2: return "the " + pick_from(engine, kNouns) + " near " + e + " were rarely mentioned .";
    default: return "many " + pick_from(engine, kAdjectives) + " " + pick_from(engine, kNouns) +
                    " gathered near " + e + " .";
  }
}

std::string memory_premise(std::mt19937_64& engine, const std::vector<std::string>& places,
                           const Fact& fact) {
  // The stated fact sits at a random slot among the distractor sentences.
  std::vector<std::string> sentences;
  for (std::size_t k = pick(engine, 3); k > 0; --k) sentences.push_back(distractor_sentence(engine, places));
  const std::string relation = kRelations[fact.relation];
  sentences.insert(sentences.begin() + static_cast<std::ptrdiff_t>(pick(engine, sentences.size() + 1)),
                   "the " + relation + " of " + fact.entity + " is " + fact.value + " .");
  std::string context;
  for (const auto& s : sentences) context += s + " ";
  return context + "what is the " + relation + " of " + fact.entity + " ?";
}

// ---------------------------------------------------------------------------
// Reasoning

const std::vector<std::string> kAgents{"the chef",   "a student", "the farmer", "my neighbor",
                                       "the doctor", "a tourist", "the old man", "a young girl"};

}  // namespace

const std::vector<std::vector<std::string>>& reasoning_scripts() {
  static const std::vector<std::vector<std::string>> scripts{
      {"fills the kettle", "boils the water", "pours the tea", "sips the tea"},
      {"digs a hole", "plants the seed", "waters the soil", "watches it sprout"},
      {"gathers the laundry", "loads the washer", "hangs the clothes", "folds the shirts"},
      {"mixes the flour", "kneads the dough", "bakes the bread", "slices the loaf"},
      {"packs a suitcase", "boards the train", "reaches the city", "checks into a hotel"},
      {"sands the fence", "opens the paint", "brushes the boards", "cleans the brushes"},
      {"baits the hook", "casts the line", "reels in a fish", "cooks the catch"},
      {"writes a letter", "seals the envelope", "attaches a stamp", "mails the letter"},
      {"pumps the tires", "rides to the park", "locks the bike", "rests on a bench"},
      {"sees dark clouds", "grabs an umbrella", "walks through the rain", "dries off at home"},
      {"boils a pot", "adds the pasta", "drains the noodles", "serves the dinner"},
      {"writes a list", "drives to the store", "pays the cashier", "unpacks the groceries"},
  };
  return scripts;
}

std::vector<Sample> gen_memory(std::size_t n, std::uint64_t seed) {
  require_even(n, "gen_memory");
  if (n == 0) return {};
  auto engine = RngStream(seed, 0x6d656d).engine();

  const std::size_t fact_count = std::max<std::size_t>(2, std::min<std::size_t>(32, n / 10));
  // Entities, values, then filler place names for the distractor sentences.
  const auto words = unique_words(engine, 2 * fact_count + kPlaceCount, 2);
  std::vector<Fact> facts(fact_count);
  for (std::size_t i = 0; i < fact_count; ++i) {
    facts[i] = {words[i], i % kRelations.size(), words[fact_count + i]};
  }
  const std::vector<std::string> places(words.begin() + 2 * static_cast<std::ptrdiff_t>(fact_count),
                                        words.end());

  // Positives visit facts round-robin in a shuffled order, so every fact has
  // at least one positive whenever n / 2 >= fact_count.
  std::vector<std::size_t> order(fact_count);
  for (std::size_t i = 0; i < fact_count; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), engine);

  std::vector<Sample> samples;
  std::vector<std::uint8_t> has_positive(fact_count, 0);
  for (std::size_t i = 0; i < n / 2; ++i) {
    const Fact& f = facts[order[i % fact_count]];
    has_positive[order[i % fact_count]] = 1;
    samples.push_back({"", Domain::kMemory, memory_premise(engine, places, f), f.value, true});
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    std::size_t key;
    std::vector<std::size_t> pool;
    do {
      key = pick(engine, fact_count);
      pool.clear();
      for (std::size_t c = 0; c < fact_count; ++c) {
        if (c != key && has_positive[c] && facts[c].value != facts[key].value) pool.push_back(c);
      }
    } while (pool.empty());
    const Fact& f = facts[key];
    samples.push_back({"", Domain::kMemory, memory_premise(engine, places, f),
                       facts[pick_from(engine, pool)].value, false});
  }
  return finalize(std::move(samples), "mem", engine);
}

std::vector<Sample> gen_reasoning(std::size_t n, std::uint64_t seed) {
  require_even(n, "gen_reasoning");
  if (n == 0) return {};
  auto engine = RngStream(seed, 0x726561).engine();
  const auto& scripts = reasoning_scripts();

  std::vector<Sample> samples;
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = i < n / 2;
    const std::size_t s = pick(engine, scripts.size());
    const auto& script = scripts[s];
    const std::size_t prefix = 1 + pick(engine, script.size() - 1);
    std::string premise = pick_from(engine, kAgents) + " " + script[0];
    for (std::size_t k = 1; k < prefix; ++k) premise += " , then " + script[k];
    premise += " .";

    std::string candidate;
    if (positive) {
      candidate = script[prefix];
    } else {
      // A step from a different script.
      std::size_t other = pick(engine, scripts.size() - 1);
      if (other >= s) ++other;
      candidate = pick_from(engine, scripts[other]);
    }
    samples.push_back({"", Domain::kReasoning, std::move(premise), "then " + candidate, positive});
  }
  return finalize(std::move(samples), "rea", engine);
}

std::vector<Sample> generate_corpus(std::size_t per_domain, std::uint64_t seed) {
  auto out = gen_memory(per_domain, mix64(seed ^ 0x01));
  auto reasoning = gen_reasoning(per_domain, mix64(seed ^ 0x02));
  out.insert(out.end(), std::make_move_iterator(reasoning.begin()),
             std::make_move_iterator(reasoning.end()));
  return out;
}

namespace {

// Longest prefix of at most `limit` bytes that does not split a UTF-8 sequence.
std::string utf8_prefix(const std::string& s, std::size_t limit) {
  if (s.size() <= limit) return s;
  std::size_t cut = limit;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return s.substr(0, cut);
}

}  // namespace

std::vector<Sample> convert_qa(const std::vector<QaItem>& items, std::uint64_t seed) {
  auto engine = RngStream(seed, 0x7161).engine();
  std::vector<const QaItem*> kept;
  for (const auto& item : items) {
    if (item.question.empty() || item.answer.empty()) {
      throw std::invalid_argument("QA item '" + item.id + "' has an empty question or answer");
    }
    if (item.question.size() <= kMemoryTextLimit) kept.push_back(&item);
  }
  std::vector<Sample> out;
  for (const QaItem* item : kept) {
    std::vector<const std::string*> wrong;
    for (const QaItem* other : kept) {
      if (other != item && other->answer != item->answer) wrong.push_back(&other->answer);
    }
    if (wrong.empty()) continue;
    std::string premise = item->question;
    const std::string context = utf8_prefix(item->context, kMemoryTextLimit);
    if (!context.empty()) premise += " " + context;
    out.push_back({item->id + "-pos", Domain::kMemory, premise, item->answer, true});
    out.push_back({item->id + "-neg", Domain::kMemory, premise, *pick_from(engine, wrong), false});
  }
  return out;
}

std::vector<Sample> convert_continuations(const std::vector<ContinuationItem>& items,
                                          std::uint64_t seed) {
  auto engine = RngStream(seed, 0x636f6e).engine();
  std::vector<Sample> out;
  for (const auto& item : items) {
    if (item.gold >= item.endings.size() || item.context.empty()) {
      throw std::invalid_argument("continuation item '" + item.id + "' is malformed");
    }
    std::vector<std::size_t> wrong;
    for (std::size_t k = 0; k < item.endings.size(); ++k) {
      if (k != item.gold && item.endings[k] != item.endings[item.gold]) wrong.push_back(k);
    }
    if (wrong.empty()) {
      throw std::invalid_argument("continuation item '" + item.id + "' has no distinct wrong ending");
    }
    out.push_back({item.id + "-pos", Domain::kReasoning, item.context, item.endings[item.gold], true});
    out.push_back({item.id + "-neg", Domain::kReasoning, item.context,
                   item.endings[pick_from(engine, wrong)], false});
  }
  return out;
}

}  // namespace mcdrop
