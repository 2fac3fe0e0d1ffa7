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

#include "mor/mor.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mor/bench.hpp"
#include "mor/corpus.hpp"
#include "mor/error.hpp"
#include "mor/forge.hpp"
#include "mor/judge.hpp"
#include "mor/provider.hpp"
#include "mor/templates.hpp"

struct mor_provider {
  std::unique_ptr<mor::Provider> impl;
};

struct mor_pool {
  mor::TemplatePool impl;
};

namespace {

static_assert(static_cast<int>(mor::Errc::InvalidArgument) + 1 == MOR_E_INVALID_ARGUMENT);
static_assert(static_cast<int>(mor::Errc::UnsupportedDataset) + 1 == MOR_E_UNSUPPORTED_DATASET);

thread_local std::string g_last_error;

mor_status fail(mor_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
mor_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return MOR_OK;
  } catch (const mor::Error& e) {
    return fail(static_cast<mor_status>(static_cast<int>(e.code()) + 1), e.what());
  } catch (const mor::Json::exception& e) {
    return fail(MOR_E_PARSE, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(MOR_E_IO, e.what());
  } catch (const std::exception& e) {
    return fail(MOR_E_INTERNAL, e.what());
  } catch (...) {
    return fail(MOR_E_INTERNAL, "unknown failure");
  }
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw mor::Error(mor::Errc::InvalidArgument, what);
}

std::vector<mor::Sample> load_source(const mor_dataset_source& src) {
  require(src.dataset && src.path, "dataset source needs a name and a path");
  const auto dataset = mor::parse_dataset(src.dataset);
  if (!std::filesystem::exists(src.path))
    throw mor::Error(mor::Errc::MissingDataset,
                     std::string(src.dataset) + " path does not exist: " + src.path);
  auto loaded = mor::load_dataset(dataset, src.path);
  if (loaded.samples.empty())
    throw mor::Error(mor::Errc::MissingDataset,
                     std::string("no usable samples in ") + src.path);
  return std::move(loaded.samples);
}

}  // namespace

extern "C" {

const char* mor_version(void) { return "0.1.0"; }

const char* mor_status_string(mor_status status) {
  if (status == MOR_OK) return "Ok";
  if (status == MOR_E_INTERNAL) return "Internal";
  if (status > MOR_OK && status < MOR_E_INTERNAL) {
    static thread_local std::string name;
    name = std::string(mor::errc_name(static_cast<mor::Errc>(status - 1)));
    return name.c_str();
  }
  return "Unknown";
}

const char* mor_last_error(void) { return g_last_error.c_str(); }

void mor_free_string(char* s) { std::free(s); }

mor_status mor_provider_open(const mor_provider_config* config, mor_provider** out) {
  return guarded([&] {
    require(config && out, "config and out are required");
    require(config->model_id && *config->model_id, "model_id is required");
    std::shared_ptr<mor::Backend> backend;
    if (config->script_path && *config->script_path) {
      backend = mor::ScriptedBackend::from_file(config->script_path);
    } else {
      require(config->endpoint && *config->endpoint, "endpoint or script_path is required");
      mor::HttpBackendOptions http;
      http.endpoint = config->endpoint;
      http.api_key = mor::api_key_from_env(config->api_key_env ? config->api_key_env : "");
      backend = mor::make_http_backend(std::move(http));
    }
    mor::ProviderOptions options;
    options.model_id = config->model_id;
    if (config->cache_dir && *config->cache_dir) options.cache_dir = config->cache_dir;
    if (config->max_concurrency) options.max_concurrency = config->max_concurrency;
    auto handle = std::make_unique<mor_provider>();
    handle->impl = std::make_unique<mor::Provider>(std::move(backend), std::move(options));
    *out = handle.release();
  });
}

void mor_provider_close(mor_provider* provider) { delete provider; }

mor_status mor_provider_complete(mor_provider* provider, const char* request_json,
                                 char** response_json) {
  return guarded([&] {
    require(provider && request_json && response_json, "provider, request and out are required");
    auto j = mor::Json::parse(request_json);
    j["model"] = provider->impl->model_id();
    const auto resp = provider->impl->complete(mor::ChatRequest::from_json(j));
    *response_json = dup_string(resp.to_json().dump());
  });
}

uint64_t mor_provider_backend_calls(const mor_provider* provider) {
  return provider ? provider->impl->backend_calls() : 0;
}

mor_status mor_pool_generate(mor_provider* teacher, size_t count, size_t batch_size,
                             uint64_t seed, const char* created_at, mor_pool** out) {
  return guarded([&] {
    require(teacher && out, "teacher and out are required");
    require(count > 0, "template count must be positive");
    mor::GenerationOptions options;
    if (batch_size) options.batch_size = batch_size;
    options.seed = seed;
    if (created_at) options.created_at = created_at;
    *out = new mor_pool{mor::generate_templates(*teacher->impl, count, options)};
  });
}

mor_status mor_pool_load(const char* path, mor_pool** out) {
  return guarded([&] {
    require(path && out, "path and out are required");
    *out = new mor_pool{mor::load_pool(path)};
  });
}

mor_status mor_pool_save(const mor_pool* pool, const char* path) {
  return guarded([&] {
    require(pool && path, "pool and path are required");
    mor::save_pool(pool->impl, path);
  });
}

size_t mor_pool_size(const mor_pool* pool) { return pool ? pool->impl.size() : 0; }

void mor_pool_free(mor_pool* pool) { delete pool; }

mor_status mor_forge_run(const mor_forge_config* config, const mor_pool* pool,
                         mor_provider* teacher, mor_provider* reasoner, char** report_json) {
  return guarded([&] {
    require(config && pool && teacher && report_json, "config, pool, teacher and out are required");
    require(config->run_dir && *config->run_dir, "run_dir is required");
    require(config->source_count > 0 && config->sources, "at least one dataset is required");

    std::vector<mor::Sample> samples;
    for (size_t i = 0; i < config->source_count; ++i) {
      auto all = load_source(config->sources[i]);
      std::vector<mor::Sample> picked;
      if (config->holdout) {
        const auto train_n = config->n_per_dataset
                                 ? config->n_per_dataset
                                 : (all.size() > config->holdout ? all.size() - config->holdout : 0);
        picked = mor::split_disjoint(all, train_n, config->holdout, config->seed).train;
      } else if (config->n_per_dataset) {
        picked = mor::sample_n(all, config->n_per_dataset, config->seed);
      } else {
        picked = std::move(all);
      }
      for (auto& s : picked) samples.push_back(std::move(s));
    }

    mor::ForgeConfig fc;
    if (config->k) fc.k = config->k;
    fc.seed = config->seed;
    fc.workers = config->workers ? config->workers : 1;
    if (config->max_samples) fc.max_samples = config->max_samples;
    auto& reason = reasoner ? *reasoner->impl : *teacher->impl;
    const auto result = config->resume
                            ? mor::resume(config->run_dir, samples, pool->impl, *teacher->impl, reason, fc)
                            : mor::build_sft_dataset(samples, pool->impl, *teacher->impl, reason,
                                                     config->run_dir, fc);
    *report_json = dup_string(result.report.to_json().dump());
  });
}

mor_status mor_regime_parse(const char* name, mor_regime* out) {
  return guarded([&] {
    require(name && out, "name and out are required");
    *out = mor::parse_eval_regime(name) == mor::Regime::CoT ? MOR_REGIME_COT : MOR_REGIME_IO;
  });
}

mor_status mor_eval_run(const mor_eval_config* config, mor_provider* model, char** report_json) {
  return guarded([&] {
    require(config && model && report_json, "config, model and out are required");
    require(config->n > 0, "slice size must be positive");
    std::map<mor::Dataset, std::vector<mor::Sample>> pools;
    for (size_t i = 0; i < config->source_count; ++i) {
      const auto dataset = mor::parse_dataset(config->sources[i].dataset ? config->sources[i].dataset : "");
      pools[dataset] = load_source(config->sources[i]);
    }
    const auto slices = mor::build_test_slices(pools, config->n, config->seed);
    mor::EvalOptions options;
    options.allow_subset = config->allow_subset != 0;
    options.workers = config->workers ? config->workers : 1;
    options.seed = config->seed;
    if (config->audit_path && *config->audit_path) options.audit_path = config->audit_path;
    if (config->timestamp) options.timestamp = config->timestamp;
    const auto regime = config->regime == MOR_REGIME_COT ? mor::Regime::CoT : mor::Regime::IO;
    const auto report = mor::run_eval(*model->impl, slices, regime, options);
    *report_json = dup_string(report.to_json().dump());
  });
}

mor_status mor_report_render(const char* const* report_jsons, size_t count, const char* format,
                             char** out) {
  return guarded([&] {
    require(out && format && (count == 0 || report_jsons), "reports, format and out are required");
    std::vector<mor::EvalReport> reports;
    for (size_t i = 0; i < count; ++i)
      reports.push_back(mor::EvalReport::from_json(mor::Json::parse(report_jsons[i])));
    *out = dup_string(mor::render_report(reports, mor::parse_report_format(format)));
  });
}

mor_status mor_aggregate_overall(const double* accuracies, size_t count, double* out) {
  return guarded([&] {
    require(out && (count == 0 || accuracies), "accuracies and out are required");
    *out = mor::aggregate_overall(std::span<const double>(accuracies, count));
  });
}

mor_status mor_judge(const char* sample_json, const char* output, char** verdict_json) {
  return guarded([&] {
    require(sample_json && output && verdict_json, "sample, output and out are required");
    const auto sample = mor::sample_from_json(mor::Json::parse(sample_json));
    *verdict_json = dup_string(mor::verdict_to_json(sample.id, mor::judge_sample(sample, output)).dump());
  });
}

}  // extern "C"
