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

#include "mor/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "mor/error.hpp"

namespace mor {

std::string_view dataset_name(Dataset d) noexcept {
  switch (d) {
    case Dataset::HotpotQA: return "hotpotqa";
    case Dataset::StrategyQA: return "strategyqa";
    case Dataset::MMLU: return "mmlu";
    case Dataset::BigTom: return "bigtom";
    case Dataset::TriviaCW: return "trivia_cw";
  }
  return "hotpotqa";
}

std::string_view dataset_title(Dataset d) noexcept {
  switch (d) {
    case Dataset::HotpotQA: return "HotpotQA";
    case Dataset::StrategyQA: return "StrategyQA";
    case Dataset::MMLU: return "MMLU";
    case Dataset::BigTom: return "BigTom";
    case Dataset::TriviaCW: return "Trivia CW";
  }
  return "";
}

Dataset parse_dataset(std::string_view name) {
  const auto n = ascii_lower(name);
  for (auto d : kAllDatasets)
    if (n == dataset_name(d)) return d;
  if (n == "trivia" || n == "trivia_creative_writing") return Dataset::TriviaCW;
  throw Error(Errc::UnsupportedDataset, "unsupported dataset '" + std::string(name) + "'");
}

std::string_view task_kind_name(TaskKind k) noexcept {
  switch (k) {
    case TaskKind::MultiHopQA: return "MultiHopQA";
    case TaskKind::YesNo: return "YesNo";
    case TaskKind::MultipleChoice: return "MultipleChoice";
    case TaskKind::TheoryOfMindChoice: return "TheoryOfMindChoice";
    case TaskKind::TriviaCreativeWriting: return "TriviaCreativeWriting";
  }
  return "";
}

TaskKind parse_task_kind(std::string_view name) {
  for (auto k : {TaskKind::MultiHopQA, TaskKind::YesNo, TaskKind::MultipleChoice,
                 TaskKind::TheoryOfMindChoice, TaskKind::TriviaCreativeWriting})
    if (name == task_kind_name(k)) return k;
  throw Error(Errc::UnknownKind, "unknown task kind '" + std::string(name) + "'");
}

TaskKind kind_of(Dataset d) noexcept {
  switch (d) {
    case Dataset::HotpotQA: return TaskKind::MultiHopQA;
    case Dataset::StrategyQA: return TaskKind::YesNo;
    case Dataset::MMLU: return TaskKind::MultipleChoice;
    case Dataset::BigTom: return TaskKind::TheoryOfMindChoice;
    case Dataset::TriviaCW: return TaskKind::TriviaCreativeWriting;
  }
  return TaskKind::MultiHopQA;
}

namespace {

void check_aliases(const TextGold& g, const std::string& where) {
  if (g.aliases.empty()) throw Error(Errc::InvalidArgument, where + ": no gold aliases");
  for (const auto& a : g.aliases)
    if (a.empty() || a != trim(a))
      throw Error(Errc::InvalidArgument, where + ": gold alias empty or not trimmed");
}

}  // namespace

void Sample::validate() const {
  const std::string where = "sample '" + id + "'";
  if (id.empty()) throw Error(Errc::InvalidArgument, "sample without id");
  if (trim(question).empty()) throw Error(Errc::InvalidArgument, where + ": empty question");
  if (kind != kind_of(dataset))
    throw Error(Errc::InvalidArgument, where + ": kind does not match dataset");
  switch (kind) {
    case TaskKind::MultiHopQA: {
      const auto* g = std::get_if<TextGold>(&gold);
      if (!g) throw Error(Errc::InvalidArgument, where + ": expected text gold");
      check_aliases(*g, where);
      break;
    }
    case TaskKind::YesNo:
      if (!std::holds_alternative<bool>(gold))
        throw Error(Errc::InvalidArgument, where + ": expected yes/no gold");
      break;
    case TaskKind::MultipleChoice:
    case TaskKind::TheoryOfMindChoice: {
      const auto* g = std::get_if<ChoiceGold>(&gold);
      if (!g) throw Error(Errc::InvalidArgument, where + ": expected choice-label gold");
      if (choices.size() < 2) throw Error(Errc::InvalidArgument, where + ": fewer than 2 choices");
      std::set<std::string> labels;
      for (const auto& c : choices) {
        if (c.label.empty() || !labels.insert(ascii_lower(c.label)).second)
          throw Error(Errc::InvalidArgument, where + ": empty or repeated choice label");
      }
      if (!labels.count(ascii_lower(g->label)))
        throw Error(Errc::InvalidArgument, where + ": gold label not among choices");
      break;
    }
    case TaskKind::TriviaCreativeWriting: {
      const auto* g = std::get_if<TriviaGold>(&gold);
      if (!g || g->answers.empty())
        throw Error(Errc::InvalidArgument, where + ": expected at least one trivia answer");
      for (const auto& a : g->answers) check_aliases(a, where);
      break;
    }
  }
}

namespace {

Json gold_to_json(const GoldAnswer& gold) {
  return std::visit(
      [](const auto& g) -> Json {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, TextGold>) {
          return {{"type", "text"}, {"aliases", g.aliases}};
        } else if constexpr (std::is_same_v<T, bool>) {
          return {{"type", "bool"}, {"value", g}};
        } else if constexpr (std::is_same_v<T, ChoiceGold>) {
          return {{"type", "choice"}, {"label", g.label}};
        } else {
          Json answers = Json::array();
          for (const auto& a : g.answers) answers.push_back(a.aliases);
          return {{"type", "trivia"}, {"answers", std::move(answers)}};
        }
      },
      gold);
}

GoldAnswer gold_from_json(const Json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "text") return TextGold{j.at("aliases").get<std::vector<std::string>>()};
  if (type == "bool") return j.at("value").get<bool>();
  if (type == "choice") return ChoiceGold{j.at("label").get<std::string>()};
  if (type == "trivia") {
    TriviaGold g;
    for (const auto& a : j.at("answers")) g.answers.push_back({a.get<std::vector<std::string>>()});
    return g;
  }
  throw Error(Errc::Parse, "unknown gold type '" + type + "'");
}

}  // namespace

Json sample_to_json(const Sample& s) {
  Json choices = Json::array();
  for (const auto& c : s.choices) choices.push_back(Json::array({c.label, c.text}));
  return {{"id", s.id},
          {"dataset", dataset_name(s.dataset)},
          {"kind", task_kind_name(s.kind)},
          {"question", s.question},
          {"context", s.context ? Json(*s.context) : Json(nullptr)},
          {"choices", std::move(choices)},
          {"gold", gold_to_json(s.gold)},
          {"meta", s.meta}};
}

Sample sample_from_json(const Json& j) {
  try {
    Sample s;
    s.id = j.at("id").get<std::string>();
    s.dataset = parse_dataset(j.at("dataset").get<std::string>());
    s.kind = parse_task_kind(j.at("kind").get<std::string>());
    s.question = j.at("question").get<std::string>();
    if (j.contains("context") && !j["context"].is_null())
      s.context = j["context"].get<std::string>();
    if (j.contains("choices"))
      for (const auto& c : j["choices"])
        s.choices.push_back({c.at(0).get<std::string>(), c.at(1).get<std::string>()});
    s.gold = gold_from_json(j.at("gold"));
    if (j.contains("meta")) s.meta = j["meta"].get<std::map<std::string, std::string>>();
    return s;
  } catch (const Json::exception& e) {
    throw Error(Errc::Parse, std::string("bad sample record: ") + e.what());
  }
}

namespace {

std::string json_id(const Json& rec, std::initializer_list<const char*> keys) {
  for (const char* k : keys) {
    if (!rec.contains(k)) continue;
    const auto& v = rec[k];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  }
  return {};
}

std::string letter(std::size_t i) { return std::string(1, static_cast<char>('A' + i)); }

Sample adapt_hotpotqa(const Json& rec, std::size_t index) {
  Sample s;
  s.dataset = Dataset::HotpotQA;
  s.kind = TaskKind::MultiHopQA;
  auto id = json_id(rec, {"_id", "id"});
  s.id = "hotpotqa-" + (id.empty() ? std::to_string(index) : id);
  s.question = trim(rec.at("question").get<std::string>());
  s.gold = TextGold{{trim(rec.at("answer").get<std::string>())}};
  if (rec.contains("context") && rec["context"].is_array()) {
    std::string ctx;
    for (const auto& para : rec["context"]) {
      std::string text;
      for (const auto& sent : para.at(1)) text += sent.get<std::string>();
      if (!ctx.empty()) ctx += "\n";
      ctx += para.at(0).get<std::string>() + ": " + trim(text);
    }
    if (!ctx.empty()) s.context = std::move(ctx);
  }
  if (rec.contains("type") && rec["type"].is_string()) s.meta["type"] = rec["type"];
  if (rec.contains("level") && rec["level"].is_string()) s.meta["level"] = rec["level"];
  return s;
}

Sample adapt_strategyqa(const Json& rec, std::size_t index) {
  Sample s;
  s.dataset = Dataset::StrategyQA;
  s.kind = TaskKind::YesNo;
  auto id = json_id(rec, {"qid", "id"});
  s.id = "strategyqa-" + (id.empty() ? std::to_string(index) : id);
  s.question = trim(rec.at("question").get<std::string>());
  s.gold = rec.at("answer").get<bool>();
  if (rec.contains("term") && rec["term"].is_string()) s.meta["term"] = rec["term"];
  return s;
}

Sample make_mmlu(std::string question, std::vector<std::string> options, std::string answer,
                 const std::string& subject, const std::string& id) {
  Sample s;
  s.dataset = Dataset::MMLU;
  s.kind = TaskKind::MultipleChoice;
  s.id = "mmlu-" + id;
  s.question = trim(question);
  for (std::size_t i = 0; i < options.size(); ++i) s.choices.push_back({letter(i), trim(options[i])});
  s.gold = ChoiceGold{trim(answer)};
  if (!subject.empty()) s.meta["subject"] = subject;
  return s;
}

Sample adapt_mmlu_json(const Json& rec, std::size_t index) {
  const auto subject = rec.value("subject", std::string());
  std::string answer;
  const auto& a = rec.at("answer");
  if (a.is_number_integer()) {
    answer = letter(a.get<std::size_t>());
  } else {
    answer = trim(a.get<std::string>());
    if (answer.size() == 1 && std::isdigit(static_cast<unsigned char>(answer[0])))
      answer = letter(static_cast<std::size_t>(answer[0] - '0'));
  }
  auto id = json_id(rec, {"id"});
  if (id.empty()) id = (subject.empty() ? std::string() : subject + "-") + std::to_string(index);
  return make_mmlu(rec.at("question").get<std::string>(),
                   rec.at("choices").get<std::vector<std::string>>(), answer, subject, id);
}

// RFC 4180 rows: quoted fields may hold commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field.push_back(c);
      any = true;
    }
  }
  if (quoted) throw Error(Errc::Parse, "unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string mmlu_subject_from_path(const std::filesystem::path& path) {
  auto stem = path.stem().string();
  for (std::string_view suffix : {"_test", "_dev", "_val", "_validation", "_train"}) {
    if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
      stem.resize(stem.size() - suffix.size());
      break;
    }
  }
  return stem;
}

Sample adapt_bigtom(const Json& rec, std::size_t index) {
  std::string condition;
  for (const char* key : {"belief_setting", "condition", "setting"}) {
    if (rec.contains(key) && rec[key].is_string()) {
      condition = rec[key].get<std::string>();
      break;
    }
  }
  const auto setting = canonical_belief_setting(condition);
  if (!setting) throw Error(Errc::InvalidArgument, "unmapped BigTom condition '" + condition + "'");

  Sample s;
  s.dataset = Dataset::BigTom;
  s.kind = TaskKind::TheoryOfMindChoice;
  auto id = json_id(rec, {"id"});
  s.id = "bigtom-" + (id.empty() ? *setting + "-" + std::to_string(index) : id);
  s.context = trim(rec.at("story").get<std::string>());
  s.question = trim(rec.at("question").get<std::string>());
  std::string correct, wrong;
  for (const char* key : {"answer_correct", "true_answer", "correct_answer"})
    if (rec.contains(key)) correct = trim(rec[key].get<std::string>());
  for (const char* key : {"answer_incorrect", "wrong_answer", "false_answer"})
    if (rec.contains(key)) wrong = trim(rec[key].get<std::string>());
  if (correct.empty() || wrong.empty())
    throw Error(Errc::InvalidArgument, "BigTom record needs both answers");
  // Option order is fixed per id so the correct answer is not always "A".
  const bool correct_first = (sha256_u64(s.id) & 1U) == 0;
  s.choices = correct_first ? std::vector<Choice>{{"A", correct}, {"B", wrong}}
                            : std::vector<Choice>{{"A", wrong}, {"B", correct}};
  s.gold = ChoiceGold{correct_first ? "A" : "B"};
  s.meta["belief_setting"] = *setting;
  return s;
}

Sample adapt_trivia(const Json& rec, std::size_t index) {
  Sample s;
  s.dataset = Dataset::TriviaCW;
  s.kind = TaskKind::TriviaCreativeWriting;
  auto id = json_id(rec, {"id", "_id"});
  s.id = "trivia_cw-" + (id.empty() ? std::to_string(index) : id);
  const auto topic = trim(rec.at("topic").get<std::string>());
  const auto questions = rec.at("questions").get<std::vector<std::string>>();
  const auto& answers = rec.at("answers");
  if (questions.empty() || answers.size() != questions.size())
    throw Error(Errc::InvalidArgument, "trivia record: questions and answers differ in length");
  s.question = "Write a short and coherent story about " + topic +
               " that incorporates the answers to the following " +
               std::to_string(questions.size()) + " questions:";
  for (std::size_t i = 0; i < questions.size(); ++i)
    s.question += "\n" + std::to_string(i + 1) + ") " + trim(questions[i]);
  TriviaGold gold;
  for (const auto& a : answers) {
    TextGold tg;
    if (a.is_string()) {
      tg.aliases.push_back(trim(a.get<std::string>()));
    } else {
      for (const auto& alias : a) {
        auto t = trim(alias.get<std::string>());
        if (!t.empty()) tg.aliases.push_back(std::move(t));
      }
    }
    gold.answers.push_back(std::move(tg));
  }
  s.gold = std::move(gold);
  s.meta["topic"] = topic;
  return s;
}

bool looks_normalized(const Json& rec) {
  return rec.is_object() && rec.contains("kind") && rec.contains("gold");
}

}  // namespace

std::optional<std::string> canonical_belief_setting(std::string_view condition) {
  auto c = ascii_lower(trim(condition));
  std::size_t i = 0;
  while (i < c.size() && (std::isdigit(static_cast<unsigned char>(c[i])) || c[i] == '_')) ++i;
  c.erase(0, i);
  for (auto& ch : c)
    if (ch == ' ' || ch == '-') ch = '_';
  for (auto s : kBeliefSettings)
    if (c == s) return std::string(s);
  return std::nullopt;
}

LoadResult load_dataset(Dataset dataset, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw Error(Errc::Io, "dataset file not found: " + path.string());
  LoadResult result;
  std::unordered_set<std::string> ids;
  const auto accept = [&](Sample s) {
    s.validate();
    if (s.dataset != dataset) throw Error(Errc::InvalidArgument, "record belongs to another dataset");
    if (!ids.insert(s.id).second) throw Error(Errc::InvalidArgument, "duplicate id " + s.id);
    result.samples.push_back(std::move(s));
  };

  const bool csv = ascii_lower(path.extension().string()) == ".csv";
  if (csv) {
    if (dataset != Dataset::MMLU)
      throw Error(Errc::UnsupportedDataset, "CSV input is only supported for mmlu");
    const auto subject = mmlu_subject_from_path(path);
    const auto rows = parse_csv(read_file(path));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      try {
        if (r.size() < 4) throw Error(Errc::InvalidArgument, "short MMLU row");
        std::vector<std::string> options(r.begin() + 1, r.end() - 1);
        accept(make_mmlu(r.front(), options, r.back(), subject, subject + "-" + std::to_string(i)));
      } catch (const std::exception& e) {
        spdlog::debug("{}:{}: skipped: {}", path.string(), i + 1, e.what());
        ++result.skipped;
      }
    }
  } else {
    const auto records = read_json_records(path);
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      try {
        if (looks_normalized(rec)) {
          accept(sample_from_json(rec));
          continue;
        }
        switch (dataset) {
          case Dataset::HotpotQA: accept(adapt_hotpotqa(rec, i)); break;
          case Dataset::StrategyQA: accept(adapt_strategyqa(rec, i)); break;
          case Dataset::MMLU: accept(adapt_mmlu_json(rec, i)); break;
          case Dataset::BigTom: accept(adapt_bigtom(rec, i)); break;
          case Dataset::TriviaCW: accept(adapt_trivia(rec, i)); break;
        }
      } catch (const std::exception& e) {
        spdlog::debug("{}: record {} skipped: {}", path.string(), i + 1, e.what());
        ++result.skipped;
      }
    }
  }
  if (result.skipped)
    spdlog::warn("{}: skipped {} unmappable {} records", path.string(), result.skipped,
                 dataset_name(dataset));
  return result;
}

std::vector<Sample> load_normalized(const std::filesystem::path& path) {
  const auto records = read_json_records(path);
  std::vector<Sample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      auto s = sample_from_json(records[i]);
      s.validate();
      out.push_back(std::move(s));
    } catch (const Error& e) {
      throw Error(Errc::Parse, e.what(), i + 1);
    }
  }
  return out;
}

void save_normalized(std::span<const Sample> samples, const std::filesystem::path& path) {
  std::string out;
  for (const auto& s : samples) {
    out += canonical_json(sample_to_json(s));
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

std::vector<Sample> sample_n(std::span<const Sample> samples, std::size_t n, std::uint64_t seed) {
  if (n > samples.size())
    throw Error(Errc::NotEnoughSamples, "requested " + std::to_string(n) + " samples from " +
                                            std::to_string(samples.size()));
  std::vector<Sample> out;
  out.reserve(n);
  for (auto i : shuffled_prefix(samples.size(), n, seed)) out.push_back(samples[i]);
  return out;
}

std::vector<Sample> sample_bigtom(std::span<const Sample> samples, std::size_t per_setting,
                                  std::uint64_t seed) {
  std::map<std::string, std::vector<Sample>> by_setting;
  for (const auto& s : samples) {
    auto it = s.meta.find("belief_setting");
    if (it != s.meta.end()) by_setting[it->second].push_back(s);
  }
  std::vector<Sample> out;
  out.reserve(per_setting * kBeliefSettings.size());
  for (auto setting : kBeliefSettings) {
    auto it = by_setting.find(std::string(setting));
    if (it == by_setting.end())
      throw Error(Errc::MissingSetting, "no BigTom samples for belief setting " + std::string(setting));
    const auto sub_seed = sha256_u64(std::to_string(seed) + ":" + std::string(setting));
    for (auto& s : sample_n(it->second, per_setting, sub_seed)) out.push_back(std::move(s));
  }
  return out;
}

Split split_disjoint(std::span<const Sample> samples, std::size_t train_n, std::size_t test_n,
                     std::uint64_t seed) {
  if (train_n + test_n > samples.size())
    throw Error(Errc::NotEnoughSamples, "train " + std::to_string(train_n) + " + test " +
                                            std::to_string(test_n) + " exceeds " +
                                            std::to_string(samples.size()) + " samples");
  // One permutation stream: the test slice is its prefix, train follows.
  const auto order = shuffled_prefix(samples.size(), test_n + train_n, seed);
  Split split;
  split.test.reserve(test_n);
  split.train.reserve(train_n);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < test_n ? split.test : split.train).push_back(samples[order[i]]);
  return split;
}

}  // namespace mor
