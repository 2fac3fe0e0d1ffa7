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

#include "mor/forge.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <mutex>

#include "mor/error.hpp"
#include "mor/prompts.hpp"

namespace mor {

namespace fs = std::filesystem;

std::string_view sample_status_name(SampleStatus s) noexcept {
  switch (s) {
    case SampleStatus::Pending: return "pending";
    case SampleStatus::Selected: return "selected";
    case SampleStatus::Reasoned: return "reasoned";
    case SampleStatus::Judged: return "judged";
    case SampleStatus::Emitted: return "emitted";
    case SampleStatus::Rejected: return "rejected";
  }
  return "pending";
}

SampleStatus parse_sample_status(std::string_view name) {
  for (auto s : {SampleStatus::Pending, SampleStatus::Selected, SampleStatus::Reasoned,
                 SampleStatus::Judged, SampleStatus::Emitted, SampleStatus::Rejected})
    if (name == sample_status_name(s)) return s;
  throw Error(Errc::Parse, "unknown sample status '" + std::string(name) + "'");
}

Json SftRecord::to_json() const {
  return {{"messages",
           Json::array({{{"role", "user"}, {"content", user}},
                        {{"role", "assistant"}, {"content", assistant}}})},
          {"meta",
           {{"sample_id", sample_id},
            {"dataset", dataset},
            {"template_id", template_id},
            {"teacher_model", teacher_model}}}};
}

SftRecord SftRecord::from_json(const Json& j) {
  SftRecord r;
  const auto& msgs = j.at("messages");
  if (msgs.size() != 2 || msgs[0].at("role") != "user" || msgs[1].at("role") != "assistant")
    throw Error(Errc::Parse, "SFT record must hold exactly a user and an assistant turn");
  r.user = msgs[0].at("content").get<std::string>();
  r.assistant = msgs[1].at("content").get<std::string>();
  const auto& meta = j.at("meta");
  r.sample_id = meta.at("sample_id").get<std::string>();
  r.dataset = meta.at("dataset").get<std::string>();
  r.template_id = meta.at("template_id").get<std::uint32_t>();
  r.teacher_model = meta.at("teacher_model").get<std::string>();
  return r;
}

SftRecord format_for_sft(const Sample& sample, const std::string& trace,
                         std::uint32_t template_id, const std::string& teacher_model) {
  SftRecord r;
  r.user = build_eval_prompt(sample, Regime::IO).text();
  r.assistant = trace;
  r.sample_id = sample.id;
  r.dataset = std::string(dataset_name(sample.dataset));
  r.template_id = template_id;
  r.teacher_model = teacher_model;
  return r;
}

Json RunReport::to_json() const {
  Json usage = Json::array();
  for (const auto& [id, count] : template_usage) usage.push_back({{"template_id", id}, {"count", count}});
  return {{"total", total},       {"kept", kept},
          {"rejected", rejected}, {"pending", pending},
          {"fallbacks", fallbacks}, {"template_usage", std::move(usage)},
          {"config_digest", config_digest}, {"complete", complete}};
}

RunReport RunReport::from_json(const Json& j) {
  RunReport r;
  r.total = j.at("total").get<std::size_t>();
  r.kept = j.at("kept").get<std::size_t>();
  r.rejected = j.at("rejected").get<std::size_t>();
  r.pending = j.at("pending").get<std::size_t>();
  r.fallbacks = j.at("fallbacks").get<std::size_t>();
  for (const auto& u : j.at("template_usage"))
    r.template_usage[u.at("template_id").get<std::uint32_t>()] = u.at("count").get<std::size_t>();
  r.config_digest = j.at("config_digest").get<std::string>();
  r.complete = j.at("complete").get<bool>();
  return r;
}

namespace {

Json config_json(std::span<const Sample> samples, const TemplatePool& pool,
                 const Provider& teacher, const Provider& reasoner, const ForgeConfig& c) {
  Json ids = Json::array();
  for (const auto& s : samples) ids.push_back(s.id);
  return {{"k", c.k},
          {"seed", c.seed},
          {"pool_digest", pool.digest()},
          {"pool_size", pool.size()},
          {"samples_digest", sha256_hex(canonical_json(ids))},
          {"sample_count", samples.size()},
          {"teacher_model", teacher.model_id()},
          {"reasoner_model", reasoner.model_id()},
          {"reason_temperature", c.reason_temperature},
          {"reason_max_tokens", c.reason_max_tokens},
          {"trivia_threshold", c.judge.trivia_threshold}};
}

struct SampleState {
  SampleStatus status = SampleStatus::Pending;
  std::optional<SelectionRecord> selection;
  std::optional<std::string> trace;
  std::optional<Verdict> verdict;

  bool settled() const {
    return status == SampleStatus::Emitted || status == SampleStatus::Rejected;
  }
};

class StateLog {
 public:
  explicit StateLog(const fs::path& path) : out_(path, std::ios::app | std::ios::binary) {
    if (!out_) throw Error(Errc::Io, "cannot append to " + path.string());
  }

  void append(std::initializer_list<Json> events) {
    std::string chunk;
    for (const auto& e : events) {
      chunk += canonical_json(e);
      chunk.push_back('\n');
    }
    std::lock_guard lock(mu_);
    out_.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    out_.flush();
    if (!out_) throw Error(Errc::Io, "state log write failed");
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

Json event(std::size_t index, const std::string& sample_id, SampleStatus status) {
  return {{"index", index}, {"sample_id", sample_id}, {"status", sample_status_name(status)}};
}

// Replays state.jsonl. A torn final line (no trailing newline) is dropped
// and trimmed from the file before new events are appended.
std::vector<SampleState> load_state(const fs::path& path, std::span<const Sample> samples) {
  std::vector<SampleState> states(samples.size());
  if (!fs::exists(path)) return states;
  auto text = read_file(path);
  if (!text.empty() && text.back() != '\n') {
    const auto keep = text.rfind('\n');
    text.resize(keep == std::string::npos ? 0 : keep + 1);
    write_file_atomic(path, text);
    spdlog::warn("dropped a torn trailing event from {}", path.string());
  }
  const auto lines = split_lines(text);
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (trim(lines[n]).empty()) continue;
    try {
      const auto e = Json::parse(lines[n]);
      const auto index = e.at("index").get<std::size_t>();
      if (index >= samples.size() || samples[index].id != e.at("sample_id").get<std::string>())
        throw Error(Errc::ConfigMismatch, "state event refers to an unknown sample");
      auto& st = states[index];
      const auto status = parse_sample_status(e.at("status").get<std::string>());
      if (status <= st.status || st.settled())
        throw Error(Errc::Parse, "non-monotone status transition for " + samples[index].id);
      switch (status) {
        case SampleStatus::Selected:
          st.selection = SelectionRecord::from_json(e.at("selection"));
          break;
        case SampleStatus::Reasoned:
          st.trace = e.at("trace").get<std::string>();
          break;
        case SampleStatus::Judged:
          st.verdict = verdict_from_json(e.at("verdict"));
          break;
        default:
          break;
      }
      st.status = status;
    } catch (const Error& err) {
      if (err.code() == Errc::ConfigMismatch) throw;
      throw Error(Errc::Parse, std::string("corrupt state log: ") + err.what(), n + 1);
    } catch (const Json::exception& err) {
      throw Error(Errc::Parse, std::string("corrupt state log: ") + err.what(), n + 1);
    }
  }
  return states;
}

RunReport summarize(std::span<const SampleState> states, const std::string& digest) {
  RunReport r;
  r.total = states.size();
  r.config_digest = digest;
  for (const auto& st : states) {
    if (st.status == SampleStatus::Emitted) ++r.kept;
    else if (st.status == SampleStatus::Rejected) ++r.rejected;
    else ++r.pending;
    if (st.settled() && st.selection) {
      ++r.template_usage[st.selection->chosen_id];
      if (st.selection->fallback_used) ++r.fallbacks;
    }
  }
  r.complete = r.pending == 0;
  return r;
}

ForgeResult run_forge(const fs::path& run_dir, std::span<const Sample> samples,
                      const TemplatePool& pool, Provider& teacher, Provider& reasoner,
                      const ForgeConfig& config, bool resuming) {
  if (config.k == 0) throw Error(Errc::InvalidArgument, "k must be at least 1");
  if (config.k > pool.size())
    throw Error(Errc::KTooLarge, "k = " + std::to_string(config.k) + " exceeds pool size " +
                                     std::to_string(pool.size()));
  for (const auto& s : samples) s.validate();

  const auto cfg = config_json(samples, pool, teacher, reasoner, config);
  const auto digest = sha256_hex(canonical_json(cfg));
  const auto config_path = run_dir / "config.json";
  const auto state_path = run_dir / "state.jsonl";

  if (resuming) {
    if (!fs::exists(config_path))
      throw Error(Errc::Config, "nothing to resume in " + run_dir.string());
    const auto stored = Json::parse(read_file(config_path));
    if (stored.value("digest", std::string()) != digest)
      throw Error(Errc::ConfigMismatch, "run in " + run_dir.string() +
                                            " was started with a different configuration");
  } else {
    if (fs::exists(config_path) || fs::exists(state_path))
      throw Error(Errc::Config, run_dir.string() + " already holds a run; resume it instead");
    fs::create_directories(run_dir);
    // The digest covers only the "config" object.
    write_file_atomic(config_path, Json{{"digest", digest}, {"config", cfg}}.dump(2) + "\n");
  }

  auto states = load_state(state_path, samples);
  StateLog log(state_path);

  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (!states[i].settled()) work.push_back(i);
  if (config.max_samples && work.size() > *config.max_samples) work.resize(*config.max_samples);

  const auto process = [&](std::size_t w) {
    const auto i = work[w];
    const auto& sample = samples[i];
    auto& st = states[i];
    if (st.status < SampleStatus::Selected) {
      const auto ids = pick_subset(pool.size(), config.k, sample.id, config.seed);
      std::vector<ReasoningTemplate> subset;
      for (auto id : ids) subset.push_back(pool.at(id));
      st.selection = select_best_template(sample, subset, teacher);
      auto e = event(i, sample.id, SampleStatus::Selected);
      e["selection"] = st.selection->to_json();
      log.append({e});
      st.status = SampleStatus::Selected;
    }
    if (st.status < SampleStatus::Reasoned) {
      const auto prompt = build_reason_prompt(sample, pool.at(st.selection->chosen_id));
      const auto resp = reasoner.complete(
          reasoner.make_request(prompt.messages, config.reason_temperature, config.reason_max_tokens));
      st.trace = resp.content;
      auto e = event(i, sample.id, SampleStatus::Reasoned);
      e["trace"] = *st.trace;
      log.append({e});
      st.status = SampleStatus::Reasoned;
    }
    if (st.status < SampleStatus::Judged) {
      st.verdict = judge_sample(sample, *st.trace, config.judge);
      auto e = event(i, sample.id, SampleStatus::Judged);
      e["verdict"] = verdict_to_json(sample.id, *st.verdict);
      const auto final_status = st.verdict->correct ? SampleStatus::Emitted : SampleStatus::Rejected;
      log.append({e, event(i, sample.id, final_status)});
      st.status = final_status;
    } else if (!st.settled()) {
      const auto final_status = st.verdict->correct ? SampleStatus::Emitted : SampleStatus::Rejected;
      log.append({event(i, sample.id, final_status)});
      st.status = final_status;
    }
  };

  parallel_for(work.size(), config.workers, process);

  ForgeResult result;
  result.sft_path = run_dir / "output.jsonl";
  result.report = summarize(states, digest);
  if (result.report.complete) {
    std::string sft, selection, verdicts;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& st = states[i];
      if (st.status == SampleStatus::Emitted) {
        sft += canonical_json(
            format_for_sft(samples[i], *st.trace, st.selection->chosen_id, teacher.model_id()).to_json());
        sft.push_back('\n');
      }
      selection += canonical_json(st.selection->to_json());
      selection.push_back('\n');
      verdicts += canonical_json(verdict_to_json(samples[i].id, *st.verdict));
      verdicts.push_back('\n');
    }
    write_file_atomic(run_dir / "selection.jsonl", selection);
    write_file_atomic(run_dir / "verdicts.jsonl", verdicts);
    write_file_atomic(result.sft_path, sft);
  }
  write_file_atomic(run_dir / "report.json", result.report.to_json().dump(2) + "\n");
  spdlog::info("forge {}: kept {} rejected {} pending {}", run_dir.string(), result.report.kept,
               result.report.rejected, result.report.pending);
  return result;
}

}  // namespace

std::string forge_config_digest(std::span<const Sample> samples, const TemplatePool& pool,
                                const Provider& teacher, const Provider& reasoner,
                                const ForgeConfig& config) {
  return sha256_hex(canonical_json(config_json(samples, pool, teacher, reasoner, config)));
}

ForgeResult build_sft_dataset(std::span<const Sample> samples, const TemplatePool& pool,
                              Provider& teacher, Provider& reasoner, const fs::path& run_dir,
                              const ForgeConfig& config) {
  return run_forge(run_dir, samples, pool, teacher, reasoner, config, false);
}

ForgeResult resume(const fs::path& run_dir, std::span<const Sample> samples,
                   const TemplatePool& pool, Provider& teacher, Provider& reasoner,
                   const ForgeConfig& config) {
  return run_forge(run_dir, samples, pool, teacher, reasoner, config, true);
}

}  // namespace mor
