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

// mor: command-line driver over libmor.
//
// Exit codes: 0 ok, 2 usage/configuration/data problems, 3 provider or
// runtime failures.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mor/mor.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(mor_status s) {
  switch (s) {
    case MOR_OK: return kExitOk;
    case MOR_E_IO:
    case MOR_E_AUTH:
    case MOR_E_RATE_LIMITED:
    case MOR_E_UNAVAILABLE:
    case MOR_E_MALFORMED_RESPONSE:
    case MOR_E_PROVIDER:
    case MOR_E_NO_MATCH:
    case MOR_E_BUDGET_EXHAUSTED:
    case MOR_E_INTERNAL:
      return kExitRuntime;
    default:
      return kExitUsage;
  }
}

struct Failure {
  int code;
};

void check(mor_status s, const char* what) {
  if (s == MOR_OK) return;
  std::cerr << "mor: " << what << ": " << mor_status_string(s) << ": " << mor_last_error() << "\n";
  throw Failure{exit_code_for(s)};
}

[[noreturn]] void usage_error(const std::string& message) {
  std::cerr << "mor: " << message << "\n";
  throw Failure{kExitUsage};
}

// Owned C string from libmor.
struct CString {
  char* p = nullptr;
  ~CString() { mor_free_string(p); }
  std::string str() const { return p ? p : ""; }
};

struct ProviderHandle {
  mor_provider* p = nullptr;
  ProviderHandle() = default;
  ProviderHandle(const ProviderHandle&) = delete;
  ProviderHandle& operator=(const ProviderHandle&) = delete;
  ~ProviderHandle() { mor_provider_close(p); }
};

struct PoolHandle {
  mor_pool* p = nullptr;
  ~PoolHandle() { mor_pool_free(p); }
};

struct Globals {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  std::string cache_dir;
  std::size_t workers = 1;
  std::size_t max_concurrency = 8;
};

void open_provider(const Globals& g, const std::string& model, const std::string& script,
                   ProviderHandle& out) {
  mor_provider_config cfg{};
  cfg.model_id = model.c_str();
  cfg.endpoint = g.endpoint.c_str();
  cfg.api_key_env = g.api_key_env.c_str();
  cfg.script_path = script.empty() ? nullptr : script.c_str();
  cfg.cache_dir = g.cache_dir.empty() ? nullptr : g.cache_dir.c_str();
  cfg.max_concurrency = g.max_concurrency;
  check(mor_provider_open(&cfg, &out.p), "opening provider");
}

std::string format_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Explicit value, else SOURCE_DATE_EPOCH, else the library's "now".
std::optional<std::string> stamp(const std::string& explicit_value) {
  if (!explicit_value.empty()) return explicit_value;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const auto v = std::strtoll(epoch, &end, 10);
    if (end && *end == '\0' && end != epoch) return format_utc(static_cast<std::time_t>(v));
  }
  return std::nullopt;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const auto tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) usage_error("cannot write " + tmp);
  }
  fs::rename(tmp, target);
}

struct Sources {
  std::vector<std::string> entries;  // name=path
  std::vector<std::string> names, paths;
  std::vector<mor_dataset_source> view;

  void resolve() {
    for (const auto& entry : entries) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
        usage_error("--dataset expects name=path, got '" + entry + "'");
      names.push_back(entry.substr(0, eq));
      paths.push_back(entry.substr(eq + 1));
    }
    for (std::size_t i = 0; i < names.size(); ++i)
      view.push_back({names[i].c_str(), paths[i].c_str()});
  }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) usage_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reasoning-template data factory and benchmark harness"};
  app.require_subcommand(1);
  // Global flags may follow the subcommand name.
  app.fallthrough();
  app.set_config("--config", "", "key = value configuration file; command-line flags win");
  app.set_version_flag("--version", std::string(mor_version()));

  Globals g;
  app.add_option("--endpoint", g.endpoint, "OpenAI-compatible chat completions URL");
  app.add_option("--api-key-env", g.api_key_env, "Environment variable holding the API key");
  app.add_option("--cache-dir", g.cache_dir, "Response cache directory");
  app.add_option("--workers", g.workers, "Samples processed in parallel")->check(CLI::PositiveNumber);
  app.add_option("--max-concurrency", g.max_concurrency, "In-flight requests per provider")
      ->check(CLI::PositiveNumber);

  // gen-templates
  auto* gen = app.add_subcommand("gen-templates", "Generate a reasoning template pool");
  std::size_t gen_count = 0;
  std::string gen_out = "templates.jsonl", gen_created_at;
  std::uint64_t gen_seed = 0;
  std::size_t gen_batch = 10;
  std::string teacher = "gpt-4o", teacher_script;
  gen->add_option("--count", gen_count, "Pool size (50, 150, 300, 500, or any positive count)")
      ->required();
  gen->add_option("--out", gen_out, "Template JSONL to write");
  gen->add_option("--seed", gen_seed, "Generation seed");
  gen->add_option("--batch", gen_batch, "Templates requested per call")->check(CLI::PositiveNumber);
  gen->add_option("--created-at", gen_created_at, "Timestamp recorded on every template");
  gen->add_option("--teacher", teacher, "Teacher model id");
  gen->add_option("--teacher-script", teacher_script, "Scripted teacher replies (JSON)");

  // build-sft
  auto* sft = app.add_subcommand("build-sft", "Build the correctness-filtered SFT dataset");
  std::string templates_path, out_dir = "sft-run";
  Sources sft_sources;
  std::size_t sft_n = 0, sft_k = 5, sft_holdout = 0, sft_max_samples = 0;
  std::uint64_t sft_seed = 0;
  bool sft_resume = false;
  std::string reasoner, reasoner_script;
  sft->add_option("--templates", templates_path, "Template JSONL")->required();
  sft->add_option("--dataset,--datasets", sft_sources.entries, "Dataset as name=path (repeatable)")
      ->required();
  sft->add_option("--n", sft_n, "Samples drawn per dataset (0: all)");
  sft->add_option("--k", sft_k, "Templates offered per sample")->check(CLI::PositiveNumber);
  sft->add_option("--seed", sft_seed, "Sampling and subset seed");
  sft->add_option("--out-dir", out_dir, "Run directory");
  sft->add_flag("--resume", sft_resume, "Continue the run in --out-dir");
  sft->add_option("--holdout", sft_holdout, "Per-dataset test slice excluded from the draw");
  sft->add_option("--max-samples", sft_max_samples, "Stop after settling this many samples");
  sft->add_option("--teacher", teacher, "Teacher model id (selection)");
  sft->add_option("--teacher-script", teacher_script, "Scripted teacher replies (JSON)");
  sft->add_option("--reasoner", reasoner, "Reasoner model id (defaults to the teacher)");
  sft->add_option("--reasoner-script", reasoner_script, "Scripted reasoner replies (JSON)");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a model on the five test slices");
  std::string model, model_script, regime_name = "io", report_path = "report.json", audit_path,
                                   eval_timestamp;
  Sources eval_sources;
  std::size_t eval_n = 50;
  std::uint64_t eval_seed = 0;
  bool allow_subset = false;
  ev->add_option("--model", model, "Model id under evaluation")->required();
  ev->add_option("--model-script", model_script, "Scripted model replies (JSON)");
  ev->add_option("--regime", regime_name, "io or cot");
  ev->add_option("--n", eval_n, "Slice size per dataset")->check(CLI::IsMember({50, 200}));
  ev->add_option("--dataset,--datasets", eval_sources.entries, "Dataset as name=path (repeatable)")
      ->required();
  ev->add_option("--seed", eval_seed, "Slice seed");
  ev->add_option("--report", report_path, "EvalReport JSON to write");
  ev->add_option("--audit", audit_path, "Verdict audit JSONL to write");
  ev->add_option("--timestamp", eval_timestamp, "Timestamp recorded in the report");
  ev->add_flag("--allow-subset", allow_subset, "Evaluate whichever datasets are given");

  // report
  auto* rep = app.add_subcommand("report", "Render one or more EvalReport files");
  std::vector<std::string> report_files;
  std::string format = "table";
  rep->add_option("reports", report_files, "report.json files")->required();
  rep->add_option("--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      if (gen_count == 0) usage_error("--count must be positive");
      ProviderHandle t;
      open_provider(g, teacher, teacher_script, t);
      const auto created = stamp(gen_created_at);
      PoolHandle pool;
      check(mor_pool_generate(t.p, gen_count, gen_batch, gen_seed,
                              created ? created->c_str() : nullptr, &pool.p),
            "generating templates");
      check(mor_pool_save(pool.p, gen_out.c_str()), "writing templates");
      std::cout << "wrote " << mor_pool_size(pool.p) << " templates to " << gen_out << "\n";
    } else if (*sft) {
      sft_sources.resolve();
      PoolHandle pool;
      check(mor_pool_load(templates_path.c_str(), &pool.p), "loading templates");
      ProviderHandle t, r;
      open_provider(g, teacher, teacher_script, t);
      const bool separate_reasoner = !reasoner.empty() || !reasoner_script.empty();
      if (separate_reasoner)
        open_provider(g, reasoner.empty() ? teacher : reasoner, reasoner_script, r);
      mor_forge_config cfg{};
      cfg.sources = sft_sources.view.data();
      cfg.source_count = sft_sources.view.size();
      cfg.n_per_dataset = sft_n;
      cfg.holdout = sft_holdout;
      cfg.k = sft_k;
      cfg.seed = sft_seed;
      cfg.workers = g.workers;
      cfg.run_dir = out_dir.c_str();
      cfg.resume = sft_resume ? 1 : 0;
      cfg.max_samples = sft_max_samples;
      CString report;
      check(mor_forge_run(&cfg, pool.p, t.p, separate_reasoner ? r.p : nullptr, &report.p),
            "building SFT dataset");
      std::cout << report.str() << "\n";
    } else if (*ev) {
      eval_sources.resolve();
      mor_regime regime{};
      check(mor_regime_parse(regime_name.c_str(), &regime), "parsing --regime");
      ProviderHandle m;
      open_provider(g, model, model_script, m);
      const auto ts = stamp(eval_timestamp);
      mor_eval_config cfg{};
      cfg.sources = eval_sources.view.data();
      cfg.source_count = eval_sources.view.size();
      cfg.regime = regime;
      cfg.n = eval_n;
      cfg.seed = eval_seed;
      cfg.workers = g.workers;
      cfg.allow_subset = allow_subset ? 1 : 0;
      cfg.audit_path = audit_path.empty() ? nullptr : audit_path.c_str();
      cfg.timestamp = ts ? ts->c_str() : nullptr;
      CString report;
      check(mor_eval_run(&cfg, m.p, &report.p), "evaluating");
      write_text_atomic(report_path, report.str() + "\n");
      const char* one[] = {report.p};
      CString table;
      check(mor_report_render(one, 1, "table", &table.p), "rendering report");
      std::cout << table.str();
    } else if (*rep) {
      std::vector<std::string> texts;
      for (const auto& f : report_files) texts.push_back(read_text(f));
      std::vector<const char*> ptrs;
      for (const auto& t : texts) ptrs.push_back(t.c_str());
      CString out;
      check(mor_report_render(ptrs.data(), ptrs.size(), format.c_str(), &out.p), "rendering");
      std::cout << out.str();
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "mor: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
