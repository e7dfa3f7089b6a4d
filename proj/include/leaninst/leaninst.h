/* Copyright 2026 The leaninst Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the leaninst library.
 *
 * Every function returns a leaninst_status. On failure the message is
 * available from leaninst_last_error() on the calling thread until the next
 * call. Strings returned through char** out-parameters are owned by the
 * caller and released with leaninst_string_free(). */
#ifndef LEANINST_LEANINST_H_
#define LEANINST_LEANINST_H_

#include <stddef.h>

#if defined(_WIN32)
#define LEANINST_API __declspec(dllexport)
#else
#define LEANINST_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum leaninst_status {
  LEANINST_OK = 0,
  LEANINST_E_INVALID_ARGUMENT = 1,
  LEANINST_E_CONFIG,
  LEANINST_E_IO,
  LEANINST_E_NOT_FOUND,
  LEANINST_E_UNKNOWN_TEMPLATE,
  LEANINST_E_MISSING_BINDING,
  LEANINST_E_BACKEND_UNAVAILABLE,
  LEANINST_E_REPLAY_MISS,
  LEANINST_E_TIMEOUT,
  LEANINST_E_EMPTY_COMPLETION,
  LEANINST_E_CHECKER_UNAVAILABLE,
  LEANINST_E_WORKSPACE_INVALID,
  LEANINST_E_CHECKER_TIMEOUT,
  LEANINST_E_MISSING_ASSET,
  LEANINST_E_ROLE_ANNOTATION_INVALID,
  LEANINST_E_DUPLICATE_ID,
  LEANINST_E_UNKNOWN_CLASS,
  LEANINST_E_SCHEMA_VIOLATION,
  LEANINST_E_GENERATION_EXHAUSTED,
  LEANINST_E_EMPTY_SOURCE,
  LEANINST_E_MISSING_PROBLEM,
  LEANINST_E_MV_INCONCLUSIVE,
  LEANINST_E_EMPTY_RUN_SET,
  LEANINST_E_INTERNAL
} leaninst_status;

typedef struct leaninst_context leaninst_context;
typedef struct leaninst_kb leaninst_kb;
typedef struct leaninst_checker leaninst_checker;

LEANINST_API const char* leaninst_version(void);
LEANINST_API const char* leaninst_status_name(leaninst_status status);
LEANINST_API const char* leaninst_last_error(void);
LEANINST_API void leaninst_string_free(char* s);

/* Run configuration. A NULL path starts from defaults. */
LEANINST_API leaninst_status leaninst_context_open(const char* config_path, leaninst_context** out);
LEANINST_API leaninst_status leaninst_context_set(leaninst_context* ctx, const char* key,
                                                  const char* value);
LEANINST_API void leaninst_context_close(leaninst_context* ctx);

/* Runs the pipeline over problems matching `filter` (comma-separated ids or
 * class ids, NULL or "" for all). `summary_json` receives
 * {"records": [...], "failed": n, "warnings": [...]}. */
LEANINST_API leaninst_status leaninst_run(leaninst_context* ctx, const char* filter,
                                          char** summary_json, int* failed);

LEANINST_API leaninst_status leaninst_evaluate(const char* run_dir, char** report_json,
                                               char** report_text);
/* Writes report.json, report.txt and timing.csv into run_dir. */
LEANINST_API leaninst_status leaninst_report(const char* run_dir, char** report_text,
                                             char** timing_csv);

/* Knowledge base stored as JSON lines at `path` (created on first persist). */
LEANINST_API leaninst_status leaninst_kb_open(const char* path, leaninst_kb** out);
LEANINST_API leaninst_status leaninst_kb_stats(leaninst_kb* kb, char** json);
LEANINST_API leaninst_status leaninst_kb_show(leaninst_kb* kb, long long id, char** json);
/* Imports every *.jsonl in seed_dir and rewrites the KB file. */
LEANINST_API leaninst_status leaninst_kb_seed(leaninst_kb* kb, const char* seed_dir,
                                              size_t* imported);
LEANINST_API leaninst_status leaninst_kb_retrieve(leaninst_kb* kb, const char* message, size_t k,
                                                  char** json);
LEANINST_API void leaninst_kb_close(leaninst_kb* kb);

LEANINST_API leaninst_status leaninst_classify(const char* message, char** kind);
LEANINST_API leaninst_status leaninst_fixer_rules(char** json);
LEANINST_API leaninst_status leaninst_fixer_apply(const char* source, char** fixed,
                                                  char** applied_json);

LEANINST_API leaninst_status leaninst_checker_open_mock(const char* fixtures_dir,
                                                        leaninst_checker** out);
LEANINST_API leaninst_status leaninst_checker_open_lake(const char* workspace,
                                                        double timeout_seconds,
                                                        leaninst_checker** out);
LEANINST_API leaninst_status leaninst_check_file(leaninst_checker* checker, const char* path,
                                                 char** report_json);
LEANINST_API void leaninst_checker_close(leaninst_checker* checker);

#ifdef __cplusplus
}
#endif

#endif /* LEANINST_LEANINST_H_ */
