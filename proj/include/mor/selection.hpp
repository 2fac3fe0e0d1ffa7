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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mor/corpus.hpp"
#include "mor/prompts.hpp"
#include "mor/provider.hpp"
#include "mor/templates.hpp"

namespace mor {

inline constexpr std::size_t kDefaultSubsetSize = 5;

struct SelectionRecord {
  std::string sample_id;
  std::vector<std::uint32_t> subset_ids;
  std::uint32_t chosen_id = 0;
  std::string raw_choice;
  bool fallback_used = false;

  Json to_json() const;
  static SelectionRecord from_json(const Json& j);
  bool operator==(const SelectionRecord&) const = default;
};

// k distinct template ids, uniform without replacement, drawn from an RNG
// seeded by hash(seed, sample_id). Independent of processing order.
std::vector<std::uint32_t> pick_subset(std::size_t pool_size, std::size_t k,
                                       std::string_view sample_id, std::uint64_t seed);

// 1-based position from the first standalone integer in [1, k].
std::optional<std::size_t> parse_choice(std::string_view reply, std::size_t k);

// Asks the teacher to pick one template. One stricter re-ask on an
// unparseable reply; after that, position 1 with fallback_used = true.
SelectionRecord select_best_template(const Sample& sample,
                                     std::span<const ReasoningTemplate> subset,
                                     Provider& teacher);

// The exact selection prompt a record was made from.
PromptBundle replay_select_prompt(const SelectionRecord& record, const Sample& sample,
                                  const TemplatePool& pool);

}  // namespace mor
