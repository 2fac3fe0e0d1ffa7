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

#include "mor/templates.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <regex>
#include <set>
#include <unordered_set>

#include "mor/error.hpp"

namespace mor {

TemplatePool::TemplatePool(std::vector<ReasoningTemplate> templates)
    : templates_(std::move(templates)) {
  if (templates_.empty()) throw Error(Errc::InvalidArgument, "template pool must not be empty");
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < templates_.size(); ++i) {
    const auto& t = templates_[i];
    if (t.id != i)
      throw Error(Errc::InvalidArgument,
                  "template ids must be dense 0..M-1; found " + std::to_string(t.id) +
                      " at position " + std::to_string(i));
    const auto key = normalize_template_text(t.text);
    if (key.empty()) throw Error(Errc::InvalidArgument, "template " + std::to_string(i) + " is blank");
    if (!seen.insert(key).second)
      throw Error(Errc::InvalidArgument, "template " + std::to_string(i) + " duplicates an earlier text");
  }
}

const ReasoningTemplate& TemplatePool::at(std::uint32_t id) const {
  if (id >= templates_.size())
    throw Error(Errc::InvalidArgument, "template id " + std::to_string(id) + " out of range");
  return templates_[id];
}

std::string TemplatePool::digest() const {
  Json ids_and_texts = Json::array();
  for (const auto& t : templates_) ids_and_texts.push_back({t.id, t.text});
  return sha256_hex(canonical_json(ids_and_texts));
}

std::string normalize_template_text(std::string_view text) {
  return collapse_whitespace(ascii_lower(text));
}

std::vector<std::string> parse_template_list(std::string_view reply) {
  static const std::regex numbered(R"(^\s*\(?\d+[.):]\s*(.*)$)");
  static const std::regex bulleted(R"(^\s*[-*]\s+(.*)$)");
  std::vector<std::string> items;
  for (const auto& line : split_lines(reply)) {
    std::smatch m;
    if (!std::regex_match(line, m, numbered) && !std::regex_match(line, m, bulleted)) continue;
    auto item = trim(m[1].str());
    // Strip markdown emphasis and wrapping quotes.
    while (item.size() >= 2 && ((item.front() == '*' && item.back() == '*') ||
                                (item.front() == '"' && item.back() == '"'))) {
      item = trim(std::string_view(item).substr(1, item.size() - 2));
    }
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

std::string build_generation_prompt(std::size_t batch_size, std::size_t request_index,
                                    std::uint64_t seed) {
  std::string p;
  p += "You are building a library of reusable reasoning strategies for solving reasoning "
       "problems of many kinds: multi-hop factual questions, yes/no questions that need an "
       "implicit plan, multiple-choice knowledge questions, stories about what people believe, "
       "and constrained creative writing.\n\n";
  p += "Write " + std::to_string(batch_size) +
       " distinct reasoning chain templates. Each template is a task-agnostic description of a "
       "problem-solving strategy, written as an instruction of one to three sentences that a "
       "solver could follow on any problem.\n\n";
  p += "Return a numbered list with one template per line, formatted as \"1. <template>\". "
       "Do not add any other text.\n\n";
  p += "Request " + std::to_string(request_index + 1) + " (seed " + std::to_string(seed) + ").";
  return p;
}

TemplatePool generate_templates(Provider& teacher, std::size_t count,
                                const GenerationOptions& options) {
  if (count == 0) throw Error(Errc::InvalidArgument, "template count must be at least 1");
  if (options.batch_size == 0) throw Error(Errc::InvalidArgument, "batch size must be at least 1");
  const std::size_t cap = options.max_requests.value_or(
      5 * ((count + options.batch_size - 1) / options.batch_size));
  const std::string created_at = options.created_at.empty() ? utc_now() : options.created_at;

  std::vector<ReasoningTemplate> collected;
  std::unordered_set<std::string> seen;
  std::size_t requests = 0;
  while (collected.size() < count && requests < cap) {
    const auto prompt = build_generation_prompt(options.batch_size, requests, options.seed);
    auto request = teacher.make_request({{Role::User, prompt}}, options.temperature,
                                        options.max_tokens);
    ++requests;
    const auto resp = teacher.complete(request);
    if (resp.finish_reason == FinishReason::Error) continue;
    std::size_t dropped = 0;
    for (auto& text : parse_template_list(resp.content)) {
      if (collected.size() == count) break;
      if (!seen.insert(normalize_template_text(text)).second) {
        ++dropped;
        continue;
      }
      collected.push_back({static_cast<std::uint32_t>(collected.size()), std::move(text),
                           teacher.model_id(), created_at});
    }
    if (dropped) spdlog::debug("template request {}: dropped {} duplicates", requests, dropped);
  }
  if (collected.size() < count)
    throw Error(Errc::BudgetExhausted, "collected " + std::to_string(collected.size()) + " of " +
                                           std::to_string(count) + " unique templates in " +
                                           std::to_string(requests) + " requests");
  return TemplatePool(std::move(collected));
}

std::string serialize_pool(const TemplatePool& pool) {
  std::string out;
  for (const auto& t : pool) {
    const Json rec = {{"id", t.id},
                      {"text", t.text},
                      {"source_model", t.source_model},
                      {"created_at", t.created_at}};
    out += canonical_json(rec);
    out.push_back('\n');
  }
  return out;
}

void save_pool(const TemplatePool& pool, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_pool(pool));
}

TemplatePool load_pool(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file(path));
  std::vector<ReasoningTemplate> templates;
  std::set<std::uint32_t> ids;
  std::unordered_set<std::string> texts;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line_no = i + 1;
    if (trim(lines[i]).empty()) throw Error(Errc::Parse, "blank line in template file", line_no);
    ReasoningTemplate t;
    try {
      const auto rec = Json::parse(lines[i]);
      t.id = rec.at("id").get<std::uint32_t>();
      t.text = rec.at("text").get<std::string>();
      t.source_model = rec.value("source_model", std::string());
      t.created_at = rec.value("created_at", std::string());
    } catch (const Json::exception& e) {
      throw Error(Errc::Parse, std::string("bad template record: ") + e.what(), line_no);
    }
    if (!ids.insert(t.id).second)
      throw Error(Errc::DuplicateId, "duplicate template id " + std::to_string(t.id), line_no);
    if (t.id != templates.size())
      throw Error(Errc::Parse, "template id " + std::to_string(t.id) + " out of line order",
                  line_no);
    if (trim(t.text).empty()) throw Error(Errc::Parse, "blank template text", line_no);
    if (!texts.insert(normalize_template_text(t.text)).second)
      throw Error(Errc::Parse, "duplicate template text", line_no);
    templates.push_back(std::move(t));
  }
  if (templates.empty()) throw Error(Errc::Parse, "template file is empty: " + path.string());
  return TemplatePool(std::move(templates));
}

}  // namespace mor
