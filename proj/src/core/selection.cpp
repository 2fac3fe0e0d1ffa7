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

#include "mor/selection.hpp"

#include <cctype>

#include "mor/error.hpp"

namespace mor {

Json SelectionRecord::to_json() const {
  return {{"sample_id", sample_id},
          {"subset_ids", subset_ids},
          {"chosen_id", chosen_id},
          {"raw_choice", raw_choice},
          {"fallback_used", fallback_used}};
}

SelectionRecord SelectionRecord::from_json(const Json& j) {
  SelectionRecord r;
  r.sample_id = j.at("sample_id").get<std::string>();
  r.subset_ids = j.at("subset_ids").get<std::vector<std::uint32_t>>();
  r.chosen_id = j.at("chosen_id").get<std::uint32_t>();
  r.raw_choice = j.at("raw_choice").get<std::string>();
  r.fallback_used = j.at("fallback_used").get<bool>();
  return r;
}

std::vector<std::uint32_t> pick_subset(std::size_t pool_size, std::size_t k,
                                       std::string_view sample_id, std::uint64_t seed) {
  if (k == 0) throw Error(Errc::InvalidArgument, "subset size must be at least 1");
  if (k > pool_size)
    throw Error(Errc::KTooLarge, "subset size " + std::to_string(k) + " exceeds pool size " +
                                     std::to_string(pool_size));
  const auto sample_seed = sha256_u64(std::to_string(seed) + "\x1f" + std::string(sample_id));
  std::vector<std::uint32_t> ids;
  ids.reserve(k);
  for (auto i : shuffled_prefix(pool_size, k, sample_seed)) ids.push_back(static_cast<std::uint32_t>(i));
  return ids;
}

std::optional<std::size_t> parse_choice(std::string_view reply, std::size_t k) {
  const auto is_alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0;
  while (i < reply.size()) {
    if (!std::isdigit(static_cast<unsigned char>(reply[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < reply.size() && std::isdigit(static_cast<unsigned char>(reply[j]))) ++j;
    const bool left_ok = i == 0 || (!is_alnum(reply[i - 1]) && reply[i - 1] != '.');
    // "2.5" is not a standalone integer; "2." at a sentence end is.
    const bool decimal = j + 1 < reply.size() && reply[j] == '.' &&
                         std::isdigit(static_cast<unsigned char>(reply[j + 1]));
    const bool right_ok = j == reply.size() || (!is_alnum(reply[j]) && !decimal);
    if (left_ok && right_ok && j - i <= 6) {
      const auto value = std::stoul(std::string(reply.substr(i, j - i)));
      if (value >= 1 && value <= k) return value;
    }
    i = j;
  }
  return std::nullopt;
}

SelectionRecord select_best_template(const Sample& sample,
                                     std::span<const ReasoningTemplate> subset,
                                     Provider& teacher) {
  if (subset.empty()) throw Error(Errc::InvalidArgument, "selection subset is empty");
  SelectionRecord record;
  record.sample_id = sample.id;
  for (const auto& t : subset) record.subset_ids.push_back(t.id);

  auto prompt = build_select_prompt(sample, subset);
  auto messages = prompt.messages;
  auto first = teacher.complete(teacher.make_request(messages, 0.0, 32));
  record.raw_choice = first.content;
  auto pos = parse_choice(first.content, subset.size());
  if (!pos) {
    messages.push_back({Role::Assistant, first.content});
    messages.push_back({Role::User, select_reask_text(subset.size())});
    auto second = teacher.complete(teacher.make_request(messages, 0.0, 32));
    record.raw_choice = second.content;
    pos = parse_choice(second.content, subset.size());
  }
  if (!pos) {
    record.fallback_used = true;
    pos = 1;
  }
  record.chosen_id = subset[*pos - 1].id;
  return record;
}

PromptBundle replay_select_prompt(const SelectionRecord& record, const Sample& sample,
                                  const TemplatePool& pool) {
  std::vector<ReasoningTemplate> subset;
  for (auto id : record.subset_ids) subset.push_back(pool.at(id));
  return build_select_prompt(sample, subset);
}

}  // namespace mor
