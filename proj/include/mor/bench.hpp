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

// Evaluation over the five test slices under the IO or CoT regime.
//
// overall is the unweighted mean of the per-dataset accuracies; BigTom's
// larger slice does not weigh more. Rounding happens only when rendering.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mor/corpus.hpp"
#include "mor/prompts.hpp"
#include "mor/provider.hpp"

namespace mor {

struct DatasetScore {
  std::size_t n = 0;
  double score_sum = 0.0;  // correct count, or summed coverage for trivia
  double accuracy = 0.0;

  bool operator==(const DatasetScore&) const = default;
};

struct EvalReport {
  std::string model_id;
  Regime regime = Regime::IO;
  std::map<Dataset, DatasetScore> per_dataset;
  double overall = 0.0;
  std::uint64_t seed = 0;
  std::string timestamp;

  Json to_json() const;
  static EvalReport from_json(const Json& j);
  bool operator==(const EvalReport&) const = default;
};

/// Mean of exactly five accuracies in [0,1]; WrongArity otherwise.
double aggregate_overall(std::span<const double> accuracies);

/// Half-up rounding to `digits` decimals, tolerant of binary representation
/// error (0.6875 -> 0.688).
double round_half_up(double value, int digits);

struct EvalOptions {
  bool allow_subset = false;  // otherwise all five datasets are required
  std::size_t workers = 1;
  std::uint64_t seed = 0;     // recorded in the report
  double temperature = 0.0;
  std::int64_t max_tokens = 2048;
  std::optional<std::filesystem::path> audit_path;  // verdict audit JSONL
  std::string timestamp;      // empty: now
};

EvalReport run_eval(Provider& model, const std::map<Dataset, std::vector<Sample>>& testsets,
                    Regime regime, const EvalOptions& options = {});

/// Test slices: n per dataset; BigTom gets four equal belief-setting blocks
/// (20 each when n is 50, n/4 otherwise).
std::map<Dataset, std::vector<Sample>> build_test_slices(
    const std::map<Dataset, std::vector<Sample>>& pools, std::size_t n, std::uint64_t seed);

std::size_t bigtom_per_setting(std::size_t n) noexcept;

enum class ReportFormat { Json, Table };

ReportFormat parse_report_format(std::string_view name);

/// json: one object per report (an array for several). table: one row per
/// report, datasets then overall; absent datasets show as "—".
std::string render_report(std::span<const EvalReport> reports, ReportFormat format);

}  // namespace mor
