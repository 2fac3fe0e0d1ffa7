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

// Answer extraction and per-kind scoring.
//
// Outputs are expected to end with an anchored answer ("Answer: ..." or, for
// trivia writing, "Answers: 1) ... 2) ..."). The last anchor wins. Choice
// kinds fall back to scanning the last 200 characters for a label.

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "mor/corpus.hpp"

namespace mor {

enum class VerdictReason { Matched, NoAnswerFound, WrongAnswer, PartialCoverage };

std::string_view verdict_reason_name(VerdictReason r) noexcept;
VerdictReason parse_verdict_reason(std::string_view name);

struct Verdict {
  bool correct = false;
  double score = 0.0;  // {0,1} for binary kinds, coverage fraction for trivia
  std::optional<std::string> extracted;
  VerdictReason reason = VerdictReason::NoAnswerFound;

  bool operator==(const Verdict&) const = default;
};

// Audit line: {sample_id, correct, score, extracted, reason}
Json verdict_to_json(const std::string& sample_id, const Verdict& v);
Verdict verdict_from_json(const Json& j);

struct JudgeOptions {
  // Trivia samples count as correct only at or above this coverage.
  double trivia_threshold = 1.0;
};

std::optional<std::string> extract_answer(std::string_view output, TaskKind kind);

// Lowercase, drop ASCII punctuation, drop articles (a/an/the), collapse
// whitespace.
std::string normalize_answer(std::string_view text);

// Fraction of trivia answers with any alias appearing (case-insensitively)
// in the output.
double trivia_coverage(const TriviaGold& gold, std::string_view output);

Verdict judge_sample(const Sample& sample, std::string_view output,
                     const JudgeOptions& options = {});

}  // namespace mor
