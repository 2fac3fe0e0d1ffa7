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

#include <doctest.h>

#include <fstream>
#include <set>

#include "mor/error.hpp"
#include "mor/forge.hpp"
#include "mor/prompts.hpp"
#include "support/check.hpp"
#include "support/fixtures.hpp"

using namespace mor;

namespace {

// Reasoner whose correctness per sample is given by `correct`.
std::shared_ptr<ScriptedBackend> reasoner_with(const std::vector<Sample>& samples,
                                               std::function<bool(std::size_t)> correct) {
  auto by_id = std::make_shared<std::map<std::string, std::pair<Sample, std::size_t>>>();
  for (std::size_t i = 0; i < samples.size(); ++i) (*by_id)[samples[i].id] = {samples[i], i};
  return std::make_shared<ScriptedBackend>([by_id, correct](const ChatRequest& r) -> std::optional<std::string> {
    const auto id = testing::tagged_id(r.joined_content());
    if (!id || !by_id->count(*id)) return std::nullopt;
    const auto& [sample, index] = by_id->at(*id);
    return testing::scripted_trace(sample, correct(index));
  });
}

struct Run {
  std::vector<Sample> samples = testing::make_mixed(100);
  TemplatePool pool = testing::make_pool(30);
  Provider teacher{testing::selection_teacher(), testing::quiet_options("teacher")};
  Provider reasoner{testing::reasoner_for(samples), testing::quiet_options("reasoner")};
};

std::string slurp(const std::filesystem::path& p) { return read_file(p); }

std::vector<SftRecord> records_of(const std::filesystem::path& p) {
  std::vector<SftRecord> out;
  for (const auto& line : split_lines(read_file(p))) out.push_back(SftRecord::from_json(Json::parse(line)));
  return out;
}

}  // namespace

TEST_CASE("an always-correct reasoner keeps every sample") {
  testing::TempDir dir;
  Run r;
  Provider reasoner(reasoner_with(r.samples, [](std::size_t) { return true; }),
                    testing::quiet_options("reasoner"));
  const auto res = build_sft_dataset(r.samples, r.pool, r.teacher, reasoner, dir / "run", {});
  CHECK(res.report.complete);
  CHECK(res.report.kept == 100);
  CHECK(res.report.rejected == 0);
  CHECK(records_of(res.sft_path).size() == 100);
}

TEST_CASE("an always-wrong reasoner keeps nothing") {
  testing::TempDir dir;
  Run r;
  Provider reasoner(reasoner_with(r.samples, [](std::size_t) { return false; }),
                    testing::quiet_options("reasoner"));
  const auto res = build_sft_dataset(r.samples, r.pool, r.teacher, reasoner, dir / "run", {});
  CHECK(res.report.kept == 0);
  CHECK(res.report.rejected == 100);
  CHECK(read_file(res.sft_path).empty());
}

TEST_CASE("kept samples are exactly the ones the judge accepts") {
  testing::TempDir dir;
  Run r;
  const auto even = [](std::size_t i) { return i % 2 == 0; };
  Provider reasoner(reasoner_with(r.samples, even), testing::quiet_options("reasoner"));
  const auto res = build_sft_dataset(r.samples, r.pool, r.teacher, reasoner, dir / "run", {});

  std::set<std::string> expected, kept;
  for (std::size_t i = 0; i < r.samples.size(); ++i)
    if (judge_sample(r.samples[i], testing::scripted_trace(r.samples[i], even(i))).correct)
      expected.insert(r.samples[i].id);
  for (const auto& rec : records_of(res.sft_path)) kept.insert(rec.sample_id);
  CHECK(kept == expected);
  CHECK(kept.size() == 50);
}

TEST_CASE("SFT records pair the plain task prompt with the reasoning trace") {
  testing::TempDir dir;
  Run r;
  const auto res = build_sft_dataset(r.samples, r.pool, r.teacher, r.reasoner, dir / "run", {});
  const auto recs = records_of(res.sft_path);
  REQUIRE_FALSE(recs.empty());
  std::map<std::string, Sample> by_id;
  for (const auto& s : r.samples) by_id[s.id] = s;
  std::size_t last_index = 0;
  for (const auto& rec : recs) {
    const auto& s = by_id.at(rec.sample_id);
    CHECK(rec.user == build_eval_prompt(s, Regime::IO).text());
    CHECK(rec.user.find(std::string(kCotTrigger)) == std::string::npos);
    CHECK(rec.user.find(r.pool.at(rec.template_id).text) == std::string::npos);
    CHECK(rec.assistant == testing::scripted_trace(s, true));
    CHECK(rec.teacher_model == "teacher");
    CHECK(rec.dataset == dataset_name(s.dataset));
    // Input order is preserved.
    const auto idx = static_cast<std::size_t>(
        std::find_if(r.samples.begin(), r.samples.end(), [&](const Sample& x) { return x.id == s.id; }) -
        r.samples.begin());
    CHECK(idx >= last_index);
    last_index = idx;
  }
  const auto line = Json::parse(split_lines(read_file(res.sft_path)).front());
  CHECK(line.at("messages").size() == 2);
  CHECK(line.at("messages")[0].at("role") == "user");
  CHECK(line.at("messages")[1].at("role") == "assistant");
}

TEST_CASE("the report accounts for every sample") {
  testing::TempDir dir;
  Run r;
  const auto res = build_sft_dataset(r.samples, r.pool, r.teacher, r.reasoner, dir / "run", {});
  CHECK(res.report.total == 100);
  CHECK(res.report.kept + res.report.rejected == 100);
  std::size_t used = 0;
  for (const auto& [id, n] : res.report.template_usage) {
    CHECK(id < r.pool.size());
    used += n;
  }
  CHECK(used == 100);
  CHECK(res.report.fallbacks > 0);
  CHECK(RunReport::from_json(Json::parse(read_file(dir / "run/report.json"))) == res.report);
  CHECK(split_lines(read_file(dir / "run/selection.jsonl")).size() == 100);
  CHECK(split_lines(read_file(dir / "run/verdicts.jsonl")).size() == 100);
}

TEST_CASE("worker count does not change any output byte") {
  testing::TempDir dir;
  Run a, b;
  ForgeConfig one, eight;
  eight.workers = 8;
  build_sft_dataset(a.samples, a.pool, a.teacher, a.reasoner, dir / "one", one);
  build_sft_dataset(b.samples, b.pool, b.teacher, b.reasoner, dir / "eight", eight);
  for (const char* f : {"output.jsonl", "selection.jsonl", "verdicts.jsonl", "report.json"})
    CHECK_MESSAGE(slurp(dir / "one" / f) == slurp(dir / "eight" / f), f);
}

TEST_CASE("an interrupted run resumes to the same bytes without repeating calls") {
  testing::TempDir dir;
  Run full;
  build_sft_dataset(full.samples, full.pool, full.teacher, full.reasoner, dir / "full", {});
  const auto full_calls = full.teacher.backend_calls() + full.reasoner.backend_calls();

  Run first;
  ForgeConfig partial;
  partial.max_samples = 40;
  const auto head = build_sft_dataset(first.samples, first.pool, first.teacher, first.reasoner,
                                      dir / "split", partial);
  CHECK_FALSE(head.report.complete);
  CHECK(head.report.pending == 60);
  CHECK_FALSE(std::filesystem::exists(dir / "split/output.jsonl"));

  Run second;  // fresh providers, as after a restart
  const auto tail = resume(dir / "split", second.samples, second.pool, second.teacher, second.reasoner, {});
  CHECK(tail.report.complete);
  const auto split_calls = first.teacher.backend_calls() + first.reasoner.backend_calls() +
                           second.teacher.backend_calls() + second.reasoner.backend_calls();
  CHECK(split_calls == full_calls);
  for (const char* f : {"output.jsonl", "selection.jsonl", "verdicts.jsonl", "report.json"})
    CHECK_MESSAGE(slurp(dir / "full" / f) == slurp(dir / "split" / f), f);
}

TEST_CASE("resuming a finished run changes nothing") {
  testing::TempDir dir;
  Run r;
  const auto done = build_sft_dataset(r.samples, r.pool, r.teacher, r.reasoner, dir / "run", {});
  const auto before = slurp(dir / "run/output.jsonl");
  Run again;
  const auto redo = resume(dir / "run", again.samples, again.pool, again.teacher, again.reasoner, {});
  CHECK(redo.report == done.report);
  CHECK(slurp(dir / "run/output.jsonl") == before);
  CHECK(again.teacher.backend_calls() + again.reasoner.backend_calls() == 0);
}

TEST_CASE("resume refuses a different configuration") {
  testing::TempDir dir;
  Run r;
  ForgeConfig partial;
  partial.max_samples = 10;
  build_sft_dataset(r.samples, r.pool, r.teacher, r.reasoner, dir / "run", partial);
  ForgeConfig other_k;
  other_k.k = 4;
  CHECK_ERRC(resume(dir / "run", r.samples, r.pool, r.teacher, r.reasoner, other_k), Errc::ConfigMismatch);
  ForgeConfig other_seed;
  other_seed.seed = 9;
  CHECK_ERRC(resume(dir / "run", r.samples, r.pool, r.teacher, r.reasoner, other_seed), Errc::ConfigMismatch);
  CHECK_ERRC(build_sft_dataset(r.samples, r.pool, r.teacher, r.reasoner, dir / "run", {}), Errc::Config);
  CHECK_ERRC(resume(dir / "nothing", r.samples, r.pool, r.teacher, r.reasoner, {}), Errc::Config);
  // Worker count is not part of the configuration.
  ForgeConfig wide;
  wide.workers = 4;
  CHECK(resume(dir / "run", r.samples, r.pool, r.teacher, r.reasoner, wide).report.complete);
}

TEST_CASE("a torn final state line is dropped on resume") {
  testing::TempDir dir;
  Run full;
  build_sft_dataset(full.samples, full.pool, full.teacher, full.reasoner, dir / "full", {});

  Run first;
  ForgeConfig partial;
  partial.max_samples = 25;
  build_sft_dataset(first.samples, first.pool, first.teacher, first.reasoner, dir / "torn", partial);
  {
    std::ofstream out(dir / "torn/state.jsonl", std::ios::app | std::ios::binary);
    out << R"({"index":30,"sample_id":")";
  }
  Run second;
  resume(dir / "torn", second.samples, second.pool, second.teacher, second.reasoner, {});
  CHECK(slurp(dir / "full/output.jsonl") == slurp(dir / "torn/output.jsonl"));
}

TEST_CASE("a provider failure mid-run leaves resumable state") {
  testing::TempDir dir;
  Run full;
  build_sft_dataset(full.samples, full.pool, full.teacher, full.reasoner, dir / "full", {});

  Run broken;
  auto failing = std::make_shared<ScriptedBackend>([inner = testing::reasoner_for(broken.samples)](
                                                       const ChatRequest& req) -> std::optional<std::string> {
    if (req.joined_content().find("[[mmlu-0057]]") != std::string::npos) return std::nullopt;
    return inner->invoke(req).content;
  });
  Provider bad_reasoner(failing, testing::quiet_options("reasoner"));
  CHECK_ERRC(build_sft_dataset(broken.samples, broken.pool, broken.teacher, bad_reasoner, dir / "run", {}),
             Errc::NoMatch);
  Run fixed;
  resume(dir / "run", fixed.samples, fixed.pool, fixed.teacher, fixed.reasoner, {});
  CHECK(slurp(dir / "full/output.jsonl") == slurp(dir / "run/output.jsonl"));
  // Nothing settled before the failure is asked again; the failed attempt
  // is the only extra call.
  const auto full_calls = full.teacher.backend_calls() + full.reasoner.backend_calls();
  const auto split_calls = broken.teacher.backend_calls() + bad_reasoner.backend_calls() +
                           fixed.teacher.backend_calls() + fixed.reasoner.backend_calls();
  CHECK(split_calls == full_calls + 1);
}

TEST_CASE("k larger than the pool is rejected before any call") {
  testing::TempDir dir;
  Run r;
  ForgeConfig big;
  big.k = 31;
  CHECK_ERRC(build_sft_dataset(r.samples, r.pool, r.teacher, r.reasoner, dir / "run", big), Errc::KTooLarge);
  CHECK(r.teacher.backend_calls() == 0);
}
