// Copyright 2026 The BCIE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


/* C interface to the critiquing library. Every call returns a bcie_status;
 * on failure bcie_last_error() describes the cause for the calling thread.
 * Strings returned through char** out-parameters are owned by the caller and
 * released with bcie_string_free. Handles are released with their _free
 * function; a service keeps its dataset and model alive on its own. */

#ifndef BCIE_BCIE_H
#define BCIE_BCIE_H

#include <stddef.h>
#include <stdint.h>

#if defined(BCIE_BUILDING_LIBRARY)
#define BCIE_API __attribute__((visibility("default")))
#else
#define BCIE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bcie_status {
  BCIE_OK = 0,
  BCIE_ERR_USAGE = 1,
  BCIE_ERR_DATA = 2,
  BCIE_ERR_NUMERICAL = 3,
  BCIE_ERR_IO = 4,
  BCIE_ERR_NOT_FOUND = 5,
  BCIE_ERR_CONFLICT = 6,
  BCIE_ERR_GONE = 7,
  BCIE_ERR_DIMENSION = 8,
  BCIE_ERR_EXHAUSTED = 9,
  BCIE_ERR_INTERNAL = 100
} bcie_status;

typedef struct bcie_dataset bcie_dataset;
typedef struct bcie_model bcie_model;
typedef struct bcie_service bcie_service;

/* Called once per training epoch with a JSON object
 * {"epoch", "loss", "valid_hit"}; valid_hit is null on epochs without a
 * validation pass. */
typedef void (*bcie_epoch_fn)(const char* epoch_json, void* user);

BCIE_API const char* bcie_version(void);
BCIE_API const char* bcie_last_error(void);
BCIE_API void bcie_string_free(char* s);

/* Dataset. options_json follows the prepare options object; out_dir may be
 * NULL to skip writing. info_json receives {"stats", "table", "warnings"}. */
BCIE_API bcie_status bcie_prepare(const char* options_json, const char* out_dir,
                                  bcie_dataset** out, char** info_json);
BCIE_API bcie_status bcie_dataset_load(const char* dir, bcie_dataset** out);
BCIE_API bcie_status bcie_dataset_stats(const bcie_dataset* ds, char** stats_json);
BCIE_API void bcie_dataset_free(bcie_dataset* ds);

/* Model. */
BCIE_API bcie_status bcie_train(const bcie_dataset* ds, const char* config_json,
                                bcie_epoch_fn on_epoch, void* user, bcie_model** out);
BCIE_API bcie_status bcie_model_info(const bcie_model* m, char** info_json);
BCIE_API bcie_status bcie_model_save(const bcie_model* m, const char* path);
BCIE_API bcie_status bcie_model_load(const char* path, bcie_model** out);
BCIE_API void bcie_model_free(bcie_model* m);

/* Link-prediction hit@k for each k, plus the popularity baseline, as CSV. */
BCIE_API bcie_status bcie_evaluate(const bcie_dataset* ds, const bcie_model* m,
                                   const uint32_t* ks, size_t n_ks, char** csv);

/* Critiquing simulation. Writes traces.jsonl, report.csv, summary.txt and
 * configs.json into out_dir when it is not NULL; summary receives the
 * human-readable summary. */
BCIE_API bcie_status bcie_simulate(const bcie_dataset* ds, const bcie_model* m,
                                   const char* options_json, const char* out_dir,
                                   char** summary);

/* Live sessions. config_json keys: "session" (session options), "strategy",
 * "ttl_seconds", "traces_dir". */
BCIE_API bcie_status bcie_service_create(const bcie_dataset* ds, const bcie_model* m,
                                         const char* config_json, bcie_service** out);
/* Routes one request. Protocol-level failures are reported through
 * http_status and the JSON body, not the return value. */
BCIE_API bcie_status bcie_service_handle(bcie_service* svc, const char* method,
                                         const char* path, const char* body,
                                         int* http_status, char** response_json);
BCIE_API void bcie_service_free(bcie_service* svc);

#ifdef __cplusplus
}
#endif

#endif /* BCIE_BCIE_H */
