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

#include "mor/judge.hpp"

#include <cctype>
#include <cstring>
#include <regex>

#include "mor/error.hpp"

namespace mor {

std::string_view verdict_reason_name(VerdictReason r) noexcept {
  switch (r) {
    case VerdictReason::Matched: return "Matched";
    case VerdictReason::NoAnswerFound: return "NoAnswerFound";
    case VerdictReason::WrongAnswer: return "WrongAnswer";
    case VerdictReason::PartialCoverage: return "PartialCoverage";
  }
  return "NoAnswerFound";
}

VerdictReason parse_verdict_reason(std::string_view name) {
  for (auto r : {VerdictReason::Matched, VerdictReason::NoAnswerFound, VerdictReason::WrongAnswer,
                 VerdictReason::PartialCoverage})
    if (name == verdict_reason_name(r)) return r;
  throw Error(Errc::Parse, "unknown verdict reason '" + std::string(name) + "'");
}

Json verdict_to_json(const std::string& sample_id, const Verdict& v) {
  return {{"sample_id", sample_id},
          {"correct", v.correct},
          {"score", v.score},
          {"extracted", v.extracted ? Json(*v.extracted) : Json(nullptr)},
          {"reason", verdict_reason_name(v.reason)}};
}

Verdict verdict_from_json(const Json& j) {
  Verdict v;
  v.correct = j.at("correct").get<bool>();
  v.score = j.at("score").get<double>();
  if (!j.at("extracted").is_null()) v.extracted = j["extracted"].get<std::string>();
  v.reason = parse_verdict_reason(j.at("reason").get<std::string>());
  return v;
}

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

// Position just past the last case-insensitive occurrence of `anchor` that
// does not continue a longer word.
std::optional<std::size_t> find_last_anchor(std::string_view text, std::string_view anchor) {
  const auto lower = ascii_lower(text);
  std::size_t pos = lower.size();
  while (pos > 0) {
    const auto hit = lower.rfind(anchor, pos - 1);
    if (hit == std::string::npos) return std::nullopt;
    if (hit == 0 || !is_alpha(lower[hit - 1])) return hit + anchor.size();
    if (hit == 0) break;
    pos = hit;
  }
  return std::nullopt;
}

std::string strip_decoration(std::string_view s) {
  auto t = trim(s);
  const auto strip = [](char c) { return c == '*' || c == '_' || c == '`' || c == '"'; };
  std::size_t b = 0, e = t.size();
  while (b < e && strip(t[b])) ++b;
  while (e > b && strip(t[e - 1])) --e;
  return trim(std::string_view(t).substr(b, e - b));
}

// The answer line after the anchor; when the anchor ends its line, the next
// non-empty line.
std::string anchored_line(std::string_view text, std::size_t start) {
  auto rest = text.substr(start);
  auto nl = rest.find('\n');
  auto line = strip_decoration(rest.substr(0, nl));
  while (line.empty() && nl != std::string_view::npos) {
    rest = rest.substr(nl + 1);
    nl = rest.find('\n');
    line = strip_decoration(rest.substr(0, nl));
  }
  return line;
}

std::string strip_label_punct(std::string_view token) {
  std::string out;
  for (char c : token)
    if (!std::strchr("()[]{}.,:;*_`'\"", c)) out.push_back(c);
  return out;
}

std::optional<std::string> label_in_line(std::string_view line) {
  // Leading token such as "B", "(b)", "B.", "B)".
  const auto first_end = line.find_first_of(" \t");
  const auto first = strip_label_punct(line.substr(0, first_end));
  if (first.size() == 1 && is_alpha(first[0]))
    return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(first[0]))));
  static const std::regex labelled(R"((?:\(([A-Ja-j])\))|(?:\b([A-J])\))|(?:\b(?:option|choice)\s+\(?([A-Ja-j])\b))",
                                   std::regex::icase);
  std::cmatch m;
  if (std::regex_search(line.data(), line.data() + line.size(), m, labelled)) {
    for (int g = 1; g <= 3; ++g)
      if (m[g].matched)
        return std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(*m[g].first))));
  }
  // Trailing capital label: "the correct choice is B." Lowercase "a" is too
  // likely to be an article.
  const auto last_start = line.find_last_of(" \t");
  const auto last = strip_label_punct(line.substr(last_start == std::string_view::npos ? 0 : last_start + 1));
  if (last.size() == 1 && last[0] >= 'A' && last[0] <= 'J') return last;
  return std::nullopt;
}

std::optional<std::string> label_in_tail(std::string_view output) {
  const auto tail = output.size() > 200 ? output.substr(output.size() - 200) : output;
  // Last labelled mention wins: "(B)", "B)", "option B", "answer is B".
  static const std::regex labelled(
      R"((?:\(([A-J])\))|(?:\b([A-J])\))|(?:\b(?:option|choice|answer is)\s+\(?([A-J])\b))",
      std::regex::icase);
  std::optional<std::string> found;
  for (std::cregex_iterator it(tail.data(), tail.data() + tail.size(), labelled), end; it != end; ++it) {
    for (int g = 1; g <= 3; ++g)
      if ((*it)[g].matched)
        found = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(*(*it)[g].first))));
  }
  if (found) return found;
  // A bare label closing the output: "... B" or "... B."
  const auto t = strip_label_punct(trim(tail));
  if (!t.empty()) {
    const auto last_space = t.find_last_of(" \t\n");
    const auto token = last_space == std::string::npos ? t : t.substr(last_space + 1);
    if (token.size() == 1 && token[0] >= 'A' && token[0] <= 'J') return token;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> extract_answer(std::string_view output, TaskKind kind) {
  if (kind == TaskKind::TriviaCreativeWriting) {
    const auto at = find_last_anchor(output, "answers:");
    if (!at) return std::nullopt;
    auto rest = trim(output.substr(*at));
    if (rest.empty()) return std::nullopt;
    return rest;
  }

  const auto at = find_last_anchor(output, "answer:");
  const bool choice_kind =
      kind == TaskKind::MultipleChoice || kind == TaskKind::TheoryOfMindChoice;
  if (!at) {
    if (choice_kind) return label_in_tail(output);
    return std::nullopt;
  }
  const auto line = anchored_line(output, *at);
  if (line.empty()) return choice_kind ? label_in_tail(output.substr(0, *at)) : std::nullopt;

  switch (kind) {
    case TaskKind::YesNo: {
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && !is_alpha(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && is_alpha(line[j])) ++j;
        const auto word = ascii_lower(std::string_view(line).substr(i, j - i));
        if (word == "yes") return std::string("Yes");
        if (word == "no") return std::string("No");
        i = j;
      }
      return line;
    }
    case TaskKind::MultipleChoice:
    case TaskKind::TheoryOfMindChoice:
      if (auto label = label_in_line(line)) return label;
      return line;
    default:
      return line;
  }
}

std::string normalize_answer(std::string_view text) {
  std::string no_punct;
  no_punct.reserve(text.size());
  for (char c : ascii_lower(text))
    if (!std::ispunct(static_cast<unsigned char>(c))) no_punct.push_back(c);
  std::string out;
  std::size_t i = 0;
  while (i < no_punct.size()) {
    while (i < no_punct.size() && std::isspace(static_cast<unsigned char>(no_punct[i]))) ++i;
    std::size_t j = i;
    while (j < no_punct.size() && !std::isspace(static_cast<unsigned char>(no_punct[j]))) ++j;
    const auto word = std::string_view(no_punct).substr(i, j - i);
    if (!word.empty() && word != "a" && word != "an" && word != "the") {
      if (!out.empty()) out.push_back(' ');
      out += word;
    }
    i = j;
  }
  return out;
}

double trivia_coverage(const TriviaGold& gold, std::string_view output) {
  if (gold.answers.empty()) return 0.0;
  const auto haystack = ascii_lower(output);
  std::size_t matched = 0;
  for (const auto& answer : gold.answers) {
    for (const auto& alias : answer.aliases) {
      const auto needle = ascii_lower(alias);
      if (!needle.empty() && haystack.find(needle) != std::string::npos) {
        ++matched;
        break;
      }
    }
  }
  return static_cast<double>(matched) / static_cast<double>(gold.answers.size());
}

namespace {

Verdict binary(bool ok, std::optional<std::string> extracted) {
  return {ok, ok ? 1.0 : 0.0, std::move(extracted),
          ok ? VerdictReason::Matched : VerdictReason::WrongAnswer};
}

template <class T>
const T& gold_as(const Sample& s) {
  if (const auto* g = std::get_if<T>(&s.gold)) return *g;
  throw Error(Errc::InvalidArgument, "sample '" + s.id + "' gold does not match its kind");
}

}  // namespace

Verdict judge_sample(const Sample& sample, std::string_view output, const JudgeOptions& options) {
  switch (sample.kind) {
    case TaskKind::MultiHopQA: {
      const auto& gold = gold_as<TextGold>(sample);
      auto extracted = extract_answer(output, sample.kind);
      if (!extracted) return {};
      const auto got = normalize_answer(*extracted);
      bool ok = false;
      for (const auto& alias : gold.aliases) {
        const auto want = normalize_answer(alias);
        if (want.empty()) continue;
        if (got == want || (" " + got + " ").find(" " + want + " ") != std::string::npos) {
          ok = true;
          break;
        }
      }
      return binary(ok, std::move(extracted));
    }
    case TaskKind::YesNo: {
      const bool gold = gold_as<bool>(sample);
      auto extracted = extract_answer(output, sample.kind);
      if (!extracted) return {};
      const bool ok = ascii_lower(*extracted) == (gold ? "yes" : "no");
      return binary(ok, std::move(extracted));
    }
    case TaskKind::MultipleChoice:
    case TaskKind::TheoryOfMindChoice: {
      const auto& gold = gold_as<ChoiceGold>(sample);
      auto extracted = extract_answer(output, sample.kind);
      if (!extracted) return {};
      const auto label = ascii_lower(strip_label_punct(trim(*extracted)));
      bool ok = label == ascii_lower(gold.label);
      if (!ok) {
        // The model may have written the option text instead of its label.
        const auto got = normalize_answer(*extracted);
        for (const auto& c : sample.choices) {
          if (!got.empty() && normalize_answer(c.text) == got) {
            ok = ascii_lower(c.label) == ascii_lower(gold.label);
            break;
          }
        }
      }
      return binary(ok, std::move(extracted));
    }
    case TaskKind::TriviaCreativeWriting: {
      const auto& gold = gold_as<TriviaGold>(sample);
      Verdict v;
      v.extracted = extract_answer(output, sample.kind);
      v.score = trivia_coverage(gold, output);
      v.correct = v.score >= options.trivia_threshold;
      if (v.correct) v.reason = VerdictReason::Matched;
      else if (v.score > 0.0) v.reason = VerdictReason::PartialCoverage;
      else if (trim(output).empty()) v.reason = VerdictReason::NoAnswerFound;
      else v.reason = VerdictReason::WrongAnswer;
      return v;
    }
  }
  throw Error(Errc::UnknownKind, "no scorer registered for task kind " +
                                     std::to_string(static_cast<int>(sample.kind)));
}

}  // namespace mor
