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

// Prompt constructors. All are pure functions of their inputs; layouts are
// documented in docs/prompts.md and frozen by tests/golden.

#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mor/corpus.hpp"
#include "mor/provider.hpp"
#include "mor/templates.hpp"

namespace mor {

enum class Regime { Select, TemplateReason, IO, CoT };

std::string_view regime_name(Regime r) noexcept;  // "select", "reason", "io", "cot"
Regime parse_eval_regime(std::string_view name);  // io|cot, case-insensitive

inline constexpr std::string_view kCotTrigger = "Let's think step by step.";

struct PromptBundle {
  std::vector<ChatMessage> messages;
  Regime regime = Regime::IO;
  std::string answer_directive;  // empty for Select

  // The single user turn's text.
  const std::string& text() const { return messages.back().content; }
};

// Final-answer instruction per task kind; total over TaskKind.
std::string_view answer_directive(TaskKind kind) noexcept;

// Question, then context and choices when present.
std::string render_task_block(const Sample& sample);

PromptBundle build_select_prompt(const Sample& sample,
                                 std::span<const ReasoningTemplate> subset);
// Follow-up turn appended after an unparseable selection reply.
std::string select_reask_text(std::size_t k);

PromptBundle build_reason_prompt(const Sample& sample, const ReasoningTemplate& tmpl);

// regime must be IO or CoT.
PromptBundle build_eval_prompt(const Sample& sample, Regime regime);

}  // namespace mor
