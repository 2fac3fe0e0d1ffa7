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

#include <cmath>

#include "mor/bench.hpp"
#include "mor/error.hpp"
#include "support/check.hpp"
#include "support/fixtures.hpp"

using namespace mor;

namespace {

std::map<Dataset, double> row(double h, double s, double m, double b, double t) {
  return {{Dataset::HotpotQA, h}, {Dataset::StrategyQA, s}, {Dataset::MMLU, m},
          {Dataset::BigTom, b}, {Dataset::TriviaCW, t}};
}

EvalReport engineered_run(const std::map<Dataset, double>& target, Regime regime = Regime::IO) {
  const auto slices = build_test_slices(testing::exact_pools(), 50, 0);
  Provider model(testing::replay_model(testing::engineered_outputs(slices, target)),
                 testing::quiet_options("engineered"));
  EvalOptions o;
  o.timestamp = "2026-01-01T00:00:00Z";
  o.workers = 4;
  return run_eval(model, slices, regime, o);
}

}  // namespace

TEST_CASE("overall is the plain mean of five accuracies") {
  const std::vector<double> a{0.98, 0.920, 0.620, 0.900, 0.232};
  CHECK(std::abs(aggregate_overall(a) - 0.730) <= 0.0005);
  const std::vector<double> b{0.640, 0.480, 0.580, 0.925, 0.300};
  CHECK(std::abs(aggregate_overall(b) - 0.585) <= 0.0005);
  const std::vector<double> zeros(5, 0.0);
  CHECK(aggregate_overall(zeros) == 0.0);
  const std::vector<double> four(4, 0.5);
  CHECK_ERRC(aggregate_overall(four), Errc::WrongArity);
  const std::vector<double> out_of_range{0.1, 0.2, 0.3, 0.4, 1.5};
  CHECK_ERRC(aggregate_overall(out_of_range), Errc::InvalidArgument);
}

TEST_CASE("half-up rounding at three decimals") {
  CHECK(round_half_up(0.6875, 3) == doctest::Approx(0.688));
  CHECK(round_half_up(0.5991, 3) == doctest::Approx(0.599));
  CHECK(round_half_up(0.0005, 3) == doctest::Approx(0.001));
  CHECK(round_half_up(0.7337, 3) == doctest::Approx(0.734));
}

TEST_CASE("test slices hold 50 per dataset and 80 BigTom items") {
  std::map<Dataset, std::vector<Sample>> pools;
  for (auto d : kAllDatasets) pools[d] = testing::make_samples(d, 400);
  const auto slices = build_test_slices(pools, 50, 3);
  for (auto d : kAllDatasets) CHECK(slices.at(d).size() == (d == Dataset::BigTom ? 80 : 50));
  const auto wide = build_test_slices(pools, 200, 3);
  for (auto d : kAllDatasets) CHECK(wide.at(d).size() == 200);
}

TEST_CASE("a perfect model scores 1.0 everywhere") {
  const auto r = engineered_run(row(1, 1, 1, 1, 1));
  for (const auto& [d, s] : r.per_dataset) CHECK(s.accuracy == 1.0);
  CHECK(r.overall == 1.0);
  CHECK(r.per_dataset.at(Dataset::BigTom).n == 80);
}

TEST_CASE("engineered accuracies reproduce the baseline IO row") {
  const auto r = engineered_run(row(1.00, 0.400, 0.540, 0.688, 0.368));
  CHECK(r.per_dataset.at(Dataset::HotpotQA).accuracy == doctest::Approx(1.0));
  CHECK(r.per_dataset.at(Dataset::StrategyQA).accuracy == doctest::Approx(0.4));
  CHECK(r.per_dataset.at(Dataset::MMLU).accuracy == doctest::Approx(0.54));
  CHECK(r.per_dataset.at(Dataset::BigTom).accuracy == doctest::Approx(55.0 / 80));
  CHECK(r.per_dataset.at(Dataset::TriviaCW).accuracy == doctest::Approx(0.368));
  CHECK(std::abs(r.overall - 0.599) <= 0.0005);
  CHECK(round_half_up(r.overall, 3) == doctest::Approx(0.599));
}

TEST_CASE("engineered accuracies reproduce the 500-template IO row") {
  const auto r = engineered_run(row(0.960, 0.920, 0.620, 0.913, 0.256));
  CHECK(std::abs(r.overall - 0.734) <= 0.0005);
}

TEST_CASE("47 of 50 reports 0.940") {
  const auto slice = testing::make_samples(Dataset::HotpotQA, 50);
  std::map<Dataset, std::vector<Sample>> sets{{Dataset::HotpotQA, slice}};
  Provider model(testing::replay_model(testing::engineered_outputs(sets, {{Dataset::HotpotQA, 0.94}})),
                 testing::quiet_options("m"));
  EvalOptions o;
  o.allow_subset = true;
  const auto r = run_eval(model, sets, Regime::CoT, o);
  CHECK(r.per_dataset.at(Dataset::HotpotQA).score_sum == 47);
  CHECK(r.per_dataset.at(Dataset::HotpotQA).accuracy == doctest::Approx(0.94));
  CHECK(render_report(std::vector<EvalReport>{r}, ReportFormat::Table).find("0.940") != std::string::npos);
}

TEST_CASE("binary-scored datasets have integral correct counts") {
  const auto r = engineered_run(row(0.7, 0.3, 0.9, 0.5, 0.37));
  for (const auto& [d, s] : r.per_dataset) {
    if (d == Dataset::TriviaCW) continue;
    CHECK(std::abs(s.accuracy * static_cast<double>(s.n) - std::round(s.accuracy * static_cast<double>(s.n))) < 1e-9);
  }
}

TEST_CASE("missing datasets are an error unless a subset is requested") {
  auto slices = build_test_slices(testing::exact_pools(), 50, 0);
  slices.erase(Dataset::MMLU);
  Provider model(testing::replay_model(testing::engineered_outputs(slices, row(1, 1, 1, 1, 1))),
                 testing::quiet_options("m"));
  CHECK_ERRC(run_eval(model, slices, Regime::IO), Errc::MissingDataset);
  EvalOptions o;
  o.allow_subset = true;
  const auto r = run_eval(model, slices, Regime::IO, o);
  CHECK(r.per_dataset.size() == 4);
  CHECK(r.overall == 1.0);
  const auto table = render_report(std::vector<EvalReport>{r}, ReportFormat::Table);
  CHECK(table.find("—") != std::string::npos);
}

TEST_CASE("a cached rerun makes no calls and yields the same report") {
  testing::TempDir dir;
  const auto slices = build_test_slices(testing::exact_pools(), 50, 0);
  const auto outputs = testing::engineered_outputs(slices, row(0.5, 0.5, 0.5, 0.5, 0.5));
  EvalOptions o;
  o.audit_path = dir / "audit.jsonl";
  Provider first(testing::replay_model(outputs), testing::quiet_options("m", dir / "cache"));
  auto a = run_eval(first, slices, Regime::CoT, o);
  Provider second(testing::replay_model(outputs), testing::quiet_options("m", dir / "cache"));
  auto b = run_eval(second, slices, Regime::CoT, o);
  CHECK(first.backend_calls() == 280);
  CHECK(second.backend_calls() == 0);
  a.timestamp = b.timestamp = "";
  CHECK(a == b);
  const auto audit = split_lines(read_file(dir / "audit.jsonl"));
  CHECK(audit.size() == 280);
  const auto line = Json::parse(audit.front());
  CHECK(line.contains("output"));
  CHECK(line.contains("correct"));
  CHECK(line.at("regime") == "cot");
}

TEST_CASE("reports render as a table and round-trip as JSON") {
  auto io = engineered_run(row(1.00, 0.400, 0.540, 0.688, 0.368), Regime::IO);
  auto cot = engineered_run(row(0.980, 0.940, 0.560, 0.750, 0.308), Regime::CoT);
  const std::vector<EvalReport> both{io, cot};
  const auto table = render_report(both, ReportFormat::Table);
  const auto lines = split_lines(table);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0].find("HotpotQA") < lines[0].find("StrategyQA"));
  CHECK(lines[0].find("Trivia CW") < lines[0].find("overall"));
  CHECK(lines[2].find("| IO ") != std::string::npos);
  CHECK(lines[3].find("| CoT ") != std::string::npos);
  CHECK(lines[2].find("0.599") != std::string::npos);
  CHECK(lines[2].find("0.688") != std::string::npos);

  const auto json = render_report(std::vector<EvalReport>{io}, ReportFormat::Json);
  CHECK(EvalReport::from_json(Json::parse(json)) == io);
  const auto arr = Json::parse(render_report(both, ReportFormat::Json));
  CHECK(arr.size() == 2);

  EvalReport empty;
  empty.model_id = "nothing";
  const auto blank = render_report(std::vector<EvalReport>{empty}, ReportFormat::Table);
  std::size_t dashes = 0;
  for (auto p = blank.find("—"); p != std::string::npos; p = blank.find("—", p + 1)) ++dashes;
  CHECK(dashes == 6);
  CHECK_ERRC(parse_report_format("xml"), Errc::Config);
}
