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

// SFT dataset construction.
//
// For every sample, in input order: draw a template subset, let the teacher
// pick the most useful template, have the reasoner solve the sample under
// that template, judge the trace, and keep it only when it is correct.
//
// A run lives in a directory:
//   config.json     configuration and its digest
//   state.jsonl     append-only per-sample event log (resume source)
//   output.jsonl    the SFT records, in sample input order
//   selection.jsonl selection audit, one SelectionRecord per sample
//   verdicts.jsonl  judge audit
//   report.json     RunReport
// The last four are written atomically once every sample is settled.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "mor/corpus.hpp"
#include "mor/judge.hpp"
#include "mor/provider.hpp"
#include "mor/selection.hpp"
#include "mor/templates.hpp"

namespace mor {

struct ForgeConfig {
  std::size_t k = kDefaultSubsetSize;
  std::uint64_t seed = 0;
  std::size_t workers = 1;  // not part of the config digest
  double reason_temperature = 0.0;
  std::int64_t reason_max_tokens = 2048;
  JudgeOptions judge;
  // Settle at most this many pending samples in this invocation, then stop
  // with resumable state. Not part of the config digest.
  std::optional<std::size_t> max_samples;
};

enum class SampleStatus { Pending, Selected, Reasoned, Judged, Emitted, Rejected };

std::string_view sample_status_name(SampleStatus s) noexcept;
SampleStatus parse_sample_status(std::string_view name);

struct SftRecord {
  std::string user;       // task text: no template, no CoT trigger
  std::string assistant;  // reasoning trace ending in the anchored answer
  std::string sample_id;
  std::string dataset;
  std::uint32_t template_id = 0;
  std::string teacher_model;

  Json to_json() const;
  static SftRecord from_json(const Json& j);
};

SftRecord format_for_sft(const Sample& sample, const std::string& trace,
                         std::uint32_t template_id, const std::string& teacher_model);

struct RunReport {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::size_t pending = 0;
  std::size_t fallbacks = 0;
  std::map<std::uint32_t, std::size_t> template_usage;  // chosen id -> count
  std::string config_digest;
  bool complete = false;

  Json to_json() const;
  static RunReport from_json(const Json& j);
  bool operator==(const RunReport&) const = default;
};

struct ForgeResult {
  std::filesystem::path sft_path;
  RunReport report;
};

std::string forge_config_digest(std::span<const Sample> samples, const TemplatePool& pool,
                                const Provider& teacher, const Provider& reasoner,
                                const ForgeConfig& config);

/// Starts a new run in `run_dir`. Fails if the directory already holds one.
ForgeResult build_sft_dataset(std::span<const Sample> samples, const TemplatePool& pool,
                              Provider& teacher, Provider& reasoner,
                              const std::filesystem::path& run_dir, const ForgeConfig& config);

/// Continues a run, redoing no settled stage. ConfigMismatch when the inputs
/// hash differently from the stored run.
ForgeResult resume(const std::filesystem::path& run_dir, std::span<const Sample> samples,
                   const TemplatePool& pool, Provider& teacher, Provider& reasoner,
                   const ForgeConfig& config);

}  // namespace mor
