/* Copyright 2026 The MoR Forge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libmor.
 *
 * Every call returns a mor_status. On failure, mor_last_error() describes the
 * failure for the calling thread until its next libmor call. Strings returned
 * through out-parameters are owned by the caller and released with
 * mor_free_string(). Structured values cross the boundary as JSON text.
 */

#ifndef MOR_MOR_H_
#define MOR_MOR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(MOR_BUILDING_LIBRARY)
#define MOR_API __declspec(dllexport)
#else
#define MOR_API __declspec(dllimport)
#endif
#else
#define MOR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mor_status {
  MOR_OK = 0,
  MOR_E_INVALID_ARGUMENT,
  MOR_E_CONFIG,
  MOR_E_PARSE,
  MOR_E_IO,
  MOR_E_AUTH,
  MOR_E_RATE_LIMITED,
  MOR_E_UNAVAILABLE,
  MOR_E_MALFORMED_RESPONSE,
  MOR_E_PROVIDER,
  MOR_E_NO_MATCH,
  MOR_E_BUDGET_EXHAUSTED,
  MOR_E_DUPLICATE_ID,
  MOR_E_NOT_ENOUGH_SAMPLES,
  MOR_E_MISSING_SETTING,
  MOR_E_K_TOO_LARGE,
  MOR_E_CONFIG_MISMATCH,
  MOR_E_MISSING_DATASET,
  MOR_E_WRONG_ARITY,
  MOR_E_UNKNOWN_KIND,
  MOR_E_UNSUPPORTED_DATASET,
  MOR_E_INTERNAL
} mor_status;

typedef struct mor_provider mor_provider;
typedef struct mor_pool mor_pool;

MOR_API const char* mor_version(void);
MOR_API const char* mor_status_string(mor_status status);
MOR_API const char* mor_last_error(void);
MOR_API void mor_free_string(char* s);

/* Provider. Exactly one of script_path or endpoint selects the backend; a
 * script wins when both are set. */
typedef struct mor_provider_config {
  const char* model_id;
  const char* endpoint;     /* OpenAI-compatible chat completions URL */
  const char* api_key_env;  /* variable holding the bearer token */
  const char* script_path;  /* scripted backend JSON */
  const char* cache_dir;    /* NULL: memory-only cache */
  size_t max_concurrency;   /* 0: default (8) */
} mor_provider_config;

MOR_API mor_status mor_provider_open(const mor_provider_config* config, mor_provider** out);
MOR_API void mor_provider_close(mor_provider* provider);
/* request_json: {"messages": [...], "temperature", "max_tokens"}; the model
 * id is the provider's. response_json: {content, finish_reason, usage, cached}. */
MOR_API mor_status mor_provider_complete(mor_provider* provider, const char* request_json,
                                         char** response_json);
MOR_API uint64_t mor_provider_backend_calls(const mor_provider* provider);

/* Template pools. created_at NULL: current UTC time. */
MOR_API mor_status mor_pool_generate(mor_provider* teacher, size_t count, size_t batch_size,
                                     uint64_t seed, const char* created_at, mor_pool** out);
MOR_API mor_status mor_pool_load(const char* path, mor_pool** out);
MOR_API mor_status mor_pool_save(const mor_pool* pool, const char* path);
MOR_API size_t mor_pool_size(const mor_pool* pool);
MOR_API void mor_pool_free(mor_pool* pool);

typedef struct mor_dataset_source {
  const char* dataset; /* hotpotqa | strategyqa | mmlu | bigtom | trivia_cw */
  const char* path;
} mor_dataset_source;

typedef struct mor_forge_config {
  const mor_dataset_source* sources;
  size_t source_count;
  size_t n_per_dataset;  /* 0: every loaded sample */
  size_t holdout;        /* per-dataset test slice kept out of the SFT draw */
  size_t k;              /* 0: default (5) */
  uint64_t seed;
  size_t workers;        /* 0: 1 */
  const char* run_dir;
  int resume;
  size_t max_samples;    /* 0: no limit */
} mor_forge_config;

/* report_json: the run report. reasoner NULL: the teacher reasons too. */
MOR_API mor_status mor_forge_run(const mor_forge_config* config, const mor_pool* pool,
                                 mor_provider* teacher, mor_provider* reasoner,
                                 char** report_json);

typedef enum mor_regime { MOR_REGIME_IO = 0, MOR_REGIME_COT = 1 } mor_regime;

MOR_API mor_status mor_regime_parse(const char* name, mor_regime* out);

typedef struct mor_eval_config {
  const mor_dataset_source* sources;
  size_t source_count;
  mor_regime regime;
  size_t n;              /* per-dataset slice size, 50 or 200 */
  uint64_t seed;
  size_t workers;        /* 0: 1 */
  int allow_subset;
  const char* audit_path; /* NULL: no audit */
  const char* timestamp;  /* NULL: now */
} mor_eval_config;

MOR_API mor_status mor_eval_run(const mor_eval_config* config, mor_provider* model,
                                char** report_json);

/* format: "json" or "table". */
MOR_API mor_status mor_report_render(const char* const* report_jsons, size_t count,
                                     const char* format, char** out);

MOR_API mor_status mor_aggregate_overall(const double* accuracies, size_t count, double* out);

/* sample_json: a normalized sample. verdict_json: {sample_id, correct,
 * score, extracted, reason}. */
MOR_API mor_status mor_judge(const char* sample_json, const char* output, char** verdict_json);

#ifdef __cplusplus
}
#endif

#endif /* MOR_MOR_H_ */
