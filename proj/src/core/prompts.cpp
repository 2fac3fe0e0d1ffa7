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

#include "mor/prompts.hpp"

#include "mor/error.hpp"

namespace mor {

std::string_view regime_name(Regime r) noexcept {
  switch (r) {
    case Regime::Select: return "select";
    case Regime::TemplateReason: return "reason";
    case Regime::IO: return "io";
    case Regime::CoT: return "cot";
  }
  return "io";
}

Regime parse_eval_regime(std::string_view name) {
  const auto n = ascii_lower(name);
  if (n == "io") return Regime::IO;
  if (n == "cot") return Regime::CoT;
  throw Error(Errc::Config, "unknown regime '" + std::string(name) + "' (expected io or cot)");
}

std::string_view answer_directive(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::MultiHopQA:
      return "End with: Answer: <short answer>";
    case TaskKind::YesNo:
      return "End with: Answer: Yes or Answer: No";
    case TaskKind::MultipleChoice:
    case TaskKind::TheoryOfMindChoice:
      return "End with: Answer: <letter>";
    case TaskKind::TriviaCreativeWriting:
      return "Write the story first. Then end with: Answers: 1) <answer> 2) <answer> ... "
             "giving one answer per question, in order.";
  }
  return "";
}

std::string render_task_block(const Sample& sample) {
  std::string out = "Task:\n" + sample.question;
  if (sample.context && !trim(*sample.context).empty()) out += "\n\nContext:\n" + *sample.context;
  if (!sample.choices.empty()) {
    out += "\n\nChoices:";
    for (const auto& c : sample.choices) out += "\n" + c.label + ") " + c.text;
  }
  return out;
}

PromptBundle build_select_prompt(const Sample& sample,
                                 std::span<const ReasoningTemplate> subset) {
  if (subset.empty()) throw Error(Errc::InvalidArgument, "selection subset is empty");
  const auto k = std::to_string(subset.size());
  std::string p;
  p += "Below is a problem followed by " + k + " candidate reasoning strategies.\n\n";
  p += render_task_block(sample);
  p += "\n\nCandidate strategies:";
  for (std::size_t i = 0; i < subset.size(); ++i)
    p += "\n" + std::to_string(i + 1) + ". " + subset[i].text;
  p += "\n\nConsidering how this problem is structured, which strategy would help most in "
       "solving it? Reply with only the number (1-" + k + ").";
  return {{{Role::User, std::move(p)}}, Regime::Select, {}};
}

std::string select_reask_text(std::size_t k) {
  return "Your reply could not be read as a choice. Reply with only a single number between 1 "
         "and " + std::to_string(k) + ", and nothing else.";
}

PromptBundle build_reason_prompt(const Sample& sample, const ReasoningTemplate& tmpl) {
  const std::string directive(answer_directive(sample.kind));
  std::string p;
  p += "Strategy:\nYou should follow this reasoning strategy when solving the task.\n";
  p += tmpl.text;
  p += "\n\n" + render_task_block(sample);
  p += "\n\n" + directive;
  return {{{Role::User, std::move(p)}}, Regime::TemplateReason, directive};
}

PromptBundle build_eval_prompt(const Sample& sample, Regime regime) {
  if (regime != Regime::IO && regime != Regime::CoT)
    throw Error(Errc::InvalidArgument, "evaluation regime must be io or cot");
  const std::string directive(answer_directive(sample.kind));
  std::string p = render_task_block(sample) + "\n\n";
  if (regime == Regime::CoT) {
    p += kCotTrigger;
    p += "\n";
  }
  p += directive;
  return {{{Role::User, std::move(p)}}, regime, directive};
}

}  // namespace mor
