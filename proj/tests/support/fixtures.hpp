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

// Shared fixtures: synthetic samples, scripted teachers and reasoners, temp
// directories. Scripted replies are pure functions of the prompt, so runs
// are reproducible at any worker count.

#pragma once

#include <atomic>
#include <cmath>
#include <map>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "mor/corpus.hpp"
#include "mor/provider.hpp"
#include "mor/templates.hpp"
#include "mor/util.hpp"

namespace mor::testing {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mor-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Every synthetic question carries "[[<id>]]" so scripted backends can tell
// samples apart.
inline std::string tag(const std::string& id) { return "[[" + id + "]]"; }

inline std::optional<std::string> tagged_id(std::string_view text) {
  static const std::regex re(R"(\[\[([^\]]+)\]\])");
  std::cmatch m;
  if (!std::regex_search(text.data(), text.data() + text.size(), m, re)) return std::nullopt;
  return m[1].str();
}

inline std::string padded(std::size_t i, int width = 4) {
  auto s = std::to_string(i);
  return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

inline Sample make_sample(Dataset d, std::size_t i) {
  Sample s;
  s.dataset = d;
  s.kind = kind_of(d);
  s.id = std::string(dataset_name(d)) + "-" + padded(i);
  switch (d) {
    case Dataset::HotpotQA:
      s.question = tag(s.id) + " Which city hosted event " + std::to_string(i) + "?";
      s.context = "Event " + std::to_string(i) + ": It was held in City " + std::to_string(i) + ".";
      s.gold = TextGold{{"City " + std::to_string(i)}};
      break;
    case Dataset::StrategyQA:
      s.question = tag(s.id) + " Is number " + std::to_string(i) + " even?";
      s.gold = i % 2 == 0;
      break;
    case Dataset::MMLU:
      s.question = tag(s.id) + " Which option is listed " + std::to_string(i % 4 + 1) + "th?";
      s.choices = {{"A", "alpha " + std::to_string(i)}, {"B", "beta " + std::to_string(i)},
                   {"C", "gamma " + std::to_string(i)}, {"D", "delta " + std::to_string(i)}};
      s.gold = ChoiceGold{std::string(1, static_cast<char>('A' + i % 4))};
      s.meta["subject"] = "synthetic";
      break;
    case Dataset::BigTom: {
      const auto setting = kBeliefSettings[i % kBeliefSettings.size()];
      s.context = "Story " + std::to_string(i) + ": Noor fills the pot with coffee.";
      s.question = tag(s.id) + " What does Noor believe the pot contains?";
      s.choices = {{"A", "coffee"}, {"B", "tea"}};
      s.gold = ChoiceGold{i % 3 == 0 ? "B" : "A"};
      s.meta["belief_setting"] = std::string(setting);
      break;
    }
    case Dataset::TriviaCW: {
      TriviaGold g;
      s.question = tag(s.id) + " Write a short story about topic " + std::to_string(i) +
                   " that answers: 1) q1 2) q2 3) q3 4) q4 5) q5";
      for (int q = 0; q < 5; ++q)
        g.answers.push_back(TextGold{{"answer" + std::to_string(i) + "x" + std::to_string(q)}});
      s.gold = g;
      break;
    }
  }
  return s;
}

inline std::vector<Sample> make_samples(Dataset d, std::size_t n, std::size_t offset = 0) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_sample(d, offset + i));
  return out;
}

// Round-robin over the five datasets.
inline std::vector<Sample> make_mixed(std::size_t n) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_sample(kAllDatasets[i % 5], i));
  return out;
}

// A trace ending in the gold answer (correct) or in a wrong one.
inline std::string scripted_trace(const Sample& s, bool correct) {
  std::string body = "Step 1: read the task. Step 2: reason about " + s.id + ".\n";
  if (const auto* t = std::get_if<TextGold>(&s.gold))
    return body + "Answer: " + (correct ? t->aliases.front() : "Nowhere");
  if (const auto* b = std::get_if<bool>(&s.gold))
    return body + "Answer: " + ((*b == correct) ? "Yes" : "No");
  if (const auto* c = std::get_if<ChoiceGold>(&s.gold)) {
    std::string wrong;
    for (const auto& ch : s.choices)
      if (ch.label != c->label) { wrong = ch.label; break; }
    return body + "Answer: " + (correct ? c->label : wrong);
  }
  const auto& g = std::get<TriviaGold>(s.gold);
  std::string story = "Once upon a time.";
  std::string answers = "Answers:";
  for (std::size_t q = 0; q < g.answers.size(); ++q) {
    const bool include = correct || q + 1 < g.answers.size();
    const auto& a = g.answers[q].aliases.front();
    if (include) story += " They met " + a + ".";
    answers += " " + std::to_string(q + 1) + ") " + (include ? a : "unknown");
  }
  return story + "\n" + answers;
}

// Trivia story mentioning the first \`covered\` gold answers.
inline std::string trivia_story(const Sample& s, std::size_t covered) {
  const auto& g = std::get<TriviaGold>(s.gold);
  std::string story = "Once upon a time.";
  for (std::size_t q = 0; q < covered && q < g.answers.size(); ++q)
    story += " They met " + g.answers[q].aliases.front() + ".";
  return story;
}

// Outputs that make each dataset score its target accuracy exactly (up to
// the slice's granularity). Trivia targets are met in fifths of a story.
inline std::map<std::string, std::string> engineered_outputs(
    const std::map<Dataset, std::vector<Sample>>& slices, const std::map<Dataset, double>& target) {
  std::map<std::string, std::string> out;
  for (const auto& [d, samples] : slices) {
    const auto n = samples.size();
    if (d == Dataset::TriviaCW) {
      auto fifths = static_cast<std::size_t>(std::llround(target.at(d) * static_cast<double>(n) * 5));
      for (const auto& s : samples) {
        const auto covered = std::min<std::size_t>(fifths, 5);
        fifths -= covered;
        out[s.id] = trivia_story(s, covered);
      }
      continue;
    }
    auto correct = static_cast<std::size_t>(std::llround(target.at(d) * static_cast<double>(n)));
    for (const auto& s : samples) {
      out[s.id] = scripted_trace(s, correct > 0);
      if (correct) --correct;
    }
  }
  return out;
}

inline std::shared_ptr<ScriptedBackend> replay_model(std::map<std::string, std::string> outputs) {
  auto table = std::make_shared<std::map<std::string, std::string>>(std::move(outputs));
  return std::make_shared<ScriptedBackend>([table](const ChatRequest& r) -> std::optional<std::string> {
    const auto id = tagged_id(r.joined_content());
    if (!id || !table->count(*id)) return std::nullopt;
    return table->at(*id);
  });
}

// Five pools that slice to exactly 50 per dataset and 80 for BigTom.
inline std::map<Dataset, std::vector<Sample>> exact_pools() {
  std::map<Dataset, std::vector<Sample>> pools;
  for (auto d : kAllDatasets) pools[d] = make_samples(d, d == Dataset::BigTom ? 80 : 50);
  return pools;
}

// Deterministic per-sample correctness for scripted reasoners.
inline bool scripted_correct(const std::string& id) { return sha256_u64("ok:" + id) % 10 < 7; }

// Deterministic per-sample selection reply; some replies are unparseable to
// exercise the re-ask and fallback paths.
inline std::string scripted_choice(const std::string& id, std::size_t k, bool reask) {
  const auto h = sha256_u64("pick:" + id);
  if (!reask && h % 11 == 0) return "Hard to say, they all look fine.";
  if (reask && h % 22 == 0) return "none of these";
  return "I would go with template " + std::to_string(h % k + 1) + ".";
}

inline std::shared_ptr<ScriptedBackend> selection_teacher(std::size_t k = 5) {
  return std::make_shared<ScriptedBackend>([k](const ChatRequest& r) -> std::optional<std::string> {
    const auto id = tagged_id(r.messages.front().content);
    if (!id) return std::nullopt;
    return scripted_choice(*id, k, r.messages.size() > 1);
  });
}

inline std::shared_ptr<ScriptedBackend> reasoner_for(const std::vector<Sample>& samples) {
  auto by_id = std::make_shared<std::map<std::string, Sample>>();
  for (const auto& s : samples) (*by_id)[s.id] = s;
  return std::make_shared<ScriptedBackend>([by_id](const ChatRequest& r) -> std::optional<std::string> {
    const auto id = tagged_id(r.joined_content());
    if (!id) return std::nullopt;
    const auto it = by_id->find(*id);
    if (it == by_id->end()) return std::nullopt;
    return scripted_trace(it->second, scripted_correct(*id));
  });
}

// Teacher for template generation: each request yields a numbered list keyed
// by its request index and seed, with one deliberate repeat per reply.
inline std::string template_reply(std::size_t request, std::uint64_t seed, std::size_t batch) {
  std::string out;
  for (std::size_t i = 0; i < batch; ++i) {
    std::string text;
    if (i + 1 == batch && request > 0)
      text = "Restate the problem in your own words before solving it (variant s" +
             std::to_string(seed) + " r0 i0).";
    else
      text = "Restate the problem in your own words before solving it (variant s" +
             std::to_string(seed) + " r" + std::to_string(request) + " i" + std::to_string(i) + ").";
    if (i == 0 && request == 0)
      text = "Restate the problem in your own words before solving it (variant s" +
             std::to_string(seed) + " r0 i0).";
    out += std::to_string(i + 1) + ". " + text + "\n";
  }
  return out;
}

inline std::shared_ptr<ScriptedBackend> template_teacher() {
  return std::make_shared<ScriptedBackend>([](const ChatRequest& r) -> std::optional<std::string> {
    static const std::regex re(R"(Write (\d+) distinct[\s\S]*Request (\d+) \(seed (\d+)\)\.)");
    std::smatch m;
    const auto text = r.joined_content();
    if (!std::regex_search(text, m, re)) return std::nullopt;
    return template_reply(std::stoul(m[2].str()) - 1, std::stoull(m[3].str()), std::stoul(m[1].str()));
  });
}

// Script file equivalent of template_teacher() for `requests` requests.
inline Json template_script(std::uint64_t seed, std::size_t requests, std::size_t batch = 10) {
  Json rules = Json::array();
  for (std::size_t r = 0; r < requests; ++r)
    rules.push_back({{"contains", "Request " + std::to_string(r + 1) + " (seed " +
                                      std::to_string(seed) + ")."},
                     {"response", template_reply(r, seed, batch)}});
  return {{"rules", rules}};
}

inline TemplatePool make_pool(std::size_t m) {
  std::vector<ReasoningTemplate> t;
  for (std::size_t i = 0; i < m; ++i)
    t.push_back({static_cast<std::uint32_t>(i), "Strategy number " + std::to_string(i) + ": work backwards.",
                 "scripted-teacher", "2026-01-01T00:00:00Z"});
  return TemplatePool(std::move(t));
}

inline ProviderOptions quiet_options(std::string model,
                                     std::optional<std::filesystem::path> cache = std::nullopt) {
  ProviderOptions o;
  o.model_id = std::move(model);
  o.cache_dir = std::move(cache);
  o.retry.sleep = [](std::chrono::milliseconds) {};
  return o;
}

}  // namespace mor::testing
