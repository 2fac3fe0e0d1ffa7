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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "mor/error.hpp"
#include "mor/prompts.hpp"
#include "support/check.hpp"
#include "support/fixtures.hpp"

using namespace mor;

namespace {

Sample mmlu_sample() {
  Sample s;
  s.id = "mmlu-astronomy-3";
  s.dataset = Dataset::MMLU;
  s.kind = TaskKind::MultipleChoice;
  s.question = "Which planet has the shortest year?";
  s.choices = {{"A", "Venus"}, {"B", "Mercury"}, {"C", "Mars"}, {"D", "Earth"}};
  s.gold = ChoiceGold{"B"};
  return s;
}

Sample strategyqa_sample() {
  Sample s;
  s.id = "strategyqa-q1";
  s.dataset = Dataset::StrategyQA;
  s.kind = TaskKind::YesNo;
  s.question = "Could a llama birth twice during the War in Vietnam (1945-46)?";
  s.gold = false;
  return s;
}

Sample hotpot_sample() {
  Sample s;
  s.id = "hotpotqa-1";
  s.dataset = Dataset::HotpotQA;
  s.kind = TaskKind::MultiHopQA;
  s.question = "Which magazine was started first, Arthur's Magazine or First for Women?";
  s.context = "Arthur's Magazine: An American literary periodical published from 1844.\n"
              "First for Women: A woman's magazine launched in 1989.";
  s.gold = TextGold{{"Arthur's Magazine"}};
  return s;
}

Sample trivia_sample() {
  Sample s;
  s.id = "trivia_cw-1";
  s.dataset = Dataset::TriviaCW;
  s.kind = TaskKind::TriviaCreativeWriting;
  s.question = "Write a short and coherent story about Harry Potter that incorporates the answers "
               "to the following 2 questions:\n1) Who painted the Mona Lisa?\n2) What is the "
               "capital of Japan?";
  s.gold = TriviaGold{{TextGold{{"Leonardo da Vinci"}}, TextGold{{"Tokyo"}}}};
  return s;
}

std::vector<ReasoningTemplate> subset() {
  return {{12, "Eliminate wrong options first.", "t", ""},
          {3, "Break the question into sub-questions and answer each in turn.", "t", ""},
          {40, "Work backwards from what the answer must look like.", "t", ""}};
}

// Compares against tests/golden/<name>; MOR_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const std::string& actual) {
  const auto path = std::filesystem::path(MOR_GOLDEN_DIR) / name;
  if (std::getenv("MOR_UPDATE_GOLDEN")) write_file_atomic(path, actual);
  REQUIRE_MESSAGE(std::filesystem::exists(path), "missing golden " << path.string());
  CHECK(read_file(path) == actual);
}

std::size_t count_of(const std::string& hay, std::string_view needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("select prompt golden") {
  const auto subs = subset();
  const auto p = build_select_prompt(mmlu_sample(), subs);
  CHECK(p.messages.size() == 1);
  CHECK(p.messages[0].role == Role::User);
  check_golden("select_mmlu.txt", p.text());
}

TEST_CASE("reason prompt golden holds the template and task verbatim") {
  const auto p = build_reason_prompt(mmlu_sample(), subset()[0]);
  CHECK(p.text().find("Eliminate wrong options first.") != std::string::npos);
  CHECK(p.text().find("Which planet has the shortest year?") != std::string::npos);
  CHECK(p.answer_directive == "End with: Answer: <letter>");
  check_golden("reason_mmlu.txt", p.text());
  CHECK(build_reason_prompt(mmlu_sample(), subset()[0]).text() == p.text());
}

TEST_CASE("eval prompt goldens") {
  check_golden("io_strategyqa.txt", build_eval_prompt(strategyqa_sample(), Regime::IO).text());
  check_golden("cot_strategyqa.txt", build_eval_prompt(strategyqa_sample(), Regime::CoT).text());
  check_golden("io_hotpotqa.txt", build_eval_prompt(hotpot_sample(), Regime::IO).text());
  check_golden("io_trivia_cw.txt", build_eval_prompt(trivia_sample(), Regime::IO).text());
}

TEST_CASE("CoT differs from IO only by the trigger sentence") {
  for (const auto& s : {strategyqa_sample(), mmlu_sample(), hotpot_sample(), trivia_sample()}) {
    const auto io = build_eval_prompt(s, Regime::IO).text();
    const auto cot = build_eval_prompt(s, Regime::CoT).text();
    CHECK(count_of(cot, kCotTrigger) == 1);
    CHECK(count_of(io, kCotTrigger) == 0);
    auto stripped = cot;
    stripped.erase(stripped.find(kCotTrigger), kCotTrigger.size() + 1);
    CHECK(stripped == io);
  }
}

TEST_CASE("prompts without context carry no empty context block") {
  const auto text = build_eval_prompt(strategyqa_sample(), Regime::IO).text();
  CHECK(text.find("Context:") == std::string::npos);
  CHECK(build_eval_prompt(hotpot_sample(), Regime::IO).text().find("Context:\n") != std::string::npos);
  auto blank = hotpot_sample();
  blank.context = "   ";
  CHECK(build_eval_prompt(blank, Regime::IO).text().find("Context:") == std::string::npos);
}

TEST_CASE("each kind gets its directive") {
  CHECK(answer_directive(TaskKind::YesNo) == "End with: Answer: Yes or Answer: No");
  CHECK(answer_directive(TaskKind::MultiHopQA) == "End with: Answer: <short answer>");
  CHECK(answer_directive(TaskKind::TheoryOfMindChoice) == "End with: Answer: <letter>");
  const auto trivia = std::string(answer_directive(TaskKind::TriviaCreativeWriting));
  CHECK(trivia.find("story") != std::string::npos);
  CHECK(trivia.find("Answers: 1)") != std::string::npos);
}

TEST_CASE("regime parsing") {
  CHECK(parse_eval_regime("IO") == Regime::IO);
  CHECK(parse_eval_regime("cot") == Regime::CoT);
  CHECK_ERRC(parse_eval_regime("tot"), Errc::Config);
  CHECK_ERRC(build_eval_prompt(strategyqa_sample(), Regime::Select), Errc::InvalidArgument);
}
