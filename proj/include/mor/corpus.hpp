// Copyright 2026 The MoR Forge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Benchmark adapters and deterministic samplers. Every adapter normalizes
// its native record layout into Sample; all sampling is a pure function of
// (input order, seed).

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mor/util.hpp"

namespace mor {

enum class Dataset { HotpotQA, StrategyQA, MMLU, BigTom, TriviaCW };

inline constexpr std::array<Dataset, 5> kAllDatasets = {
    Dataset::HotpotQA, Dataset::StrategyQA, Dataset::MMLU, Dataset::BigTom, Dataset::TriviaCW};

enum class TaskKind { MultiHopQA, YesNo, MultipleChoice, TheoryOfMindChoice, TriviaCreativeWriting };

std::string_view dataset_name(Dataset d) noexcept;      // "hotpotqa", ...
std::string_view dataset_title(Dataset d) noexcept;     // "HotpotQA", ...
Dataset parse_dataset(std::string_view name);           // throws UnsupportedDataset
std::string_view task_kind_name(TaskKind k) noexcept;
TaskKind parse_task_kind(std::string_view name);        // throws UnknownKind
TaskKind kind_of(Dataset d) noexcept;

struct Choice {
  std::string label;
  std::string text;
  bool operator==(const Choice&) const = default;
};

struct TextGold {
  std::vector<std::string> aliases;
  bool operator==(const TextGold&) const = default;
};
struct ChoiceGold {
  std::string label;
  bool operator==(const ChoiceGold&) const = default;
};
struct TriviaGold {
  std::vector<TextGold> answers;  // one alias set per trivia question
  bool operator==(const TriviaGold&) const = default;
};
using GoldAnswer = std::variant<TextGold, bool, ChoiceGold, TriviaGold>;

struct Sample {
  std::string id;
  Dataset dataset = Dataset::HotpotQA;
  TaskKind kind = TaskKind::MultiHopQA;
  std::string question;
  std::optional<std::string> context;
  std::vector<Choice> choices;
  GoldAnswer gold;
  std::map<std::string, std::string> meta;

  // Throws InvalidArgument when the kind's invariants do not hold.
  void validate() const;

  bool operator==(const Sample&) const = default;
};

Json sample_to_json(const Sample& s);
Sample sample_from_json(const Json& j);

struct LoadResult {
  std::vector<Sample> samples;
  std::size_t skipped = 0;
};

// Native layouts:
//  hotpotqa   JSON array / JSONL: {_id, question, answer, context: [[title, [sentences]]]}
//  strategyqa JSON array / JSONL: {qid, question, answer: bool}
//  mmlu       headerless CSV rows (question, A, B, C, D, answer letter), subject from the
//             file name; or JSON/JSONL {question, choices: [..], answer: int|letter, subject}
//  bigtom     JSON/JSONL {story, question, answer_correct, answer_incorrect, condition}
//  trivia_cw  JSONL {topic, questions: [..], answers: [[aliases..], ..]}
// Files whose records already carry {kind, gold} are read as normalized samples.
LoadResult load_dataset(Dataset dataset, const std::filesystem::path& path);

std::vector<Sample> load_normalized(const std::filesystem::path& path);
void save_normalized(std::span<const Sample> samples, const std::filesystem::path& path);

// BigTom belief settings, in slice order.
inline constexpr std::array<std::string_view, 4> kBeliefSettings = {
    "forward_belief_true_belief", "forward_belief_false_belief",
    "backward_belief_true_belief", "backward_belief_false_belief"};

// Maps BigToM condition names ("0_forward_belief_false_belief", ...) onto
// kBeliefSettings; nullopt for conditions outside the four.
std::optional<std::string> canonical_belief_setting(std::string_view condition);

/// n distinct samples, uniform without replacement, in draw order.
std::vector<Sample> sample_n(std::span<const Sample> samples, std::size_t n, std::uint64_t seed);

/// per_setting samples from each of the four belief settings.
std::vector<Sample> sample_bigtom(std::span<const Sample> samples, std::size_t per_setting,
                                  std::uint64_t seed);

struct Split {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Disjoint train/test; test is drawn first, so it does not depend on train_n.
Split split_disjoint(std::span<const Sample> samples, std::size_t train_n, std::size_t test_n,
                     std::uint64_t seed);

}  // namespace mor
