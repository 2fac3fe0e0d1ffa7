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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mor/provider.hpp"

namespace mor {

/// One reusable, task-agnostic problem-solving strategy.
struct ReasoningTemplate {
  std::uint32_t id = 0;
  std::string text;
  std::string source_model;
  std::string created_at;

  bool operator==(const ReasoningTemplate&) const = default;
};

/// Immutable pool of reasoning templates with dense ids 0..M-1 and texts that
/// are unique after normalize_template_text().
class TemplatePool {
 public:
  explicit TemplatePool(std::vector<ReasoningTemplate> templates);

  std::size_t size() const noexcept { return templates_.size(); }
  const ReasoningTemplate& at(std::uint32_t id) const;
  std::span<const ReasoningTemplate> templates() const noexcept { return templates_; }
  auto begin() const noexcept { return templates_.begin(); }
  auto end() const noexcept { return templates_.end(); }

  // Digest over ids and texts; part of the forge config digest.
  std::string digest() const;

  bool operator==(const TemplatePool&) const = default;

 private:
  std::vector<ReasoningTemplate> templates_;
};

// Lowercase + collapse whitespace; the dedup key.
std::string normalize_template_text(std::string_view text);

// Extracts items from a numbered ("1." / "1)") or bulleted list reply.
std::vector<std::string> parse_template_list(std::string_view reply);

std::string build_generation_prompt(std::size_t batch_size, std::size_t request_index,
                                    std::uint64_t seed);

struct GenerationOptions {
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  std::int64_t max_tokens = 2048;
  std::string created_at;  // empty: now
  // Attempt cap is 5 * ceil(M / batch_size) unless overridden.
  std::optional<std::size_t> max_requests;
};

/// Asks the teacher for batches of strategies until `count` distinct ones
/// are collected. Throws BudgetExhausted when the request cap is reached.
TemplatePool generate_templates(Provider& teacher, std::size_t count,
                                const GenerationOptions& options = {});

/// Template JSONL: {id, text, source_model, created_at} per line, id order =
/// line order.
TemplatePool load_pool(const std::filesystem::path& path);
void save_pool(const TemplatePool& pool, const std::filesystem::path& path);
std::string serialize_pool(const TemplatePool& pool);

}  // namespace mor
