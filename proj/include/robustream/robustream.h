/* Copyright 2026 The robustream Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to robustream. All objects are opaque handles owned by the
 * caller and released with the matching *_free function. Functions return
 * RS_OK or an error status; rs_last_error() then describes the failure on
 * the calling thread. Strings returned through char** are released with
 * rs_string_free. */

#ifndef ROBUSTREAM_ROBUSTREAM_H_
#define ROBUSTREAM_ROBUSTREAM_H_

#include <stdint.h>

#if defined(_WIN32)
#define RS_API __declspec(dllexport)
#else
#define RS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rs_status {
  RS_OK = 0,
  RS_INVALID_INPUT = 1,
  RS_INVALID_CONFIG = 2,
  RS_STREAM_EXHAUSTED = 3,
  RS_PRUNE_FAILED = 4,
  RS_FILTER_STUCK = 5,
  RS_NUMERICAL_FAILURE = 6,
  RS_IO = 7,
  RS_INTERNAL = 8
} rs_status;

typedef enum rs_run_status {
  RS_RUN_CERTIFIED = 0,
  RS_RUN_NOT_CERTIFIED = 1,
  RS_RUN_BUDGET_EXHAUSTED = 2
} rs_run_status;

typedef struct rs_config rs_config;
typedef struct rs_stream rs_stream;
typedef struct rs_scenario rs_scenario;
typedef struct rs_result rs_result;

RS_API const char* rs_version(void);
RS_API const char* rs_last_error(void);
RS_API const char* rs_status_name(rs_status s);
RS_API void rs_string_free(char* s);

/* ---- configuration ---- */
RS_API rs_status rs_config_new(rs_config** out);
RS_API rs_status rs_config_from_json(const char* json, rs_config** out);
/* Sets one numeric field by its JSON name (e.g. "eps", "budget"). */
RS_API rs_status rs_config_set(rs_config* c, const char* key, double value);
RS_API rs_status rs_config_get(const rs_config* c, const char* key, double* value);
RS_API rs_status rs_config_to_json(const rs_config* c, char** out);
RS_API void rs_config_free(rs_config* c);

/* ---- streams ---- */
/* format: "bin" or "csv"; dim 0 infers it. */
RS_API rs_status rs_stream_open_file(const char* path, const char* format, int64_t dim,
                                     rs_stream** out);
/* Copies n row-major points of dimension d. */
RS_API rs_status rs_stream_from_buffer(const double* data, uint64_t n, int64_t d,
                                       rs_stream** out);
/* Label-free stream of a scenario. */
RS_API rs_status rs_stream_open_scenario(const rs_scenario* s, rs_stream** out);
RS_API int64_t rs_stream_dim(const rs_stream* s);
RS_API uint64_t rs_stream_consumed(const rs_stream* s);
RS_API void rs_stream_free(rs_stream* s);

/* ---- scenarios ---- */
RS_API rs_status rs_scenario_from_json(const char* json, rs_scenario** out);
RS_API int64_t rs_scenario_point_dim(const rs_scenario* s);
RS_API uint64_t rs_scenario_size(const rs_scenario* s);
/* Writes n points, binary with labels (labeled != 0) or without, or CSV. */
RS_API rs_status rs_scenario_generate(const rs_scenario* s, const char* path,
                                      const char* format, int labeled);
RS_API rs_status rs_scenario_true_mean(const rs_scenario* s, double* out, int64_t cap);
RS_API void rs_scenario_free(rs_scenario* s);

/* ---- estimators ---- */
RS_API rs_status rs_estimate_streaming(rs_stream* s, const rs_config* c, rs_result** out);
RS_API rs_status rs_estimate_batch(const double* data, uint64_t n, int64_t d,
                                   const rs_config* c, rs_result** out);
/* mode: "streaming", "batch" or "multipass". */
RS_API rs_status rs_estimate_file(const char* path, const char* format, int64_t dim,
                                  const char* mode, const rs_config* c, rs_result** out);
/* Result vector is the d*d second-moment matrix, column-major. */
RS_API rs_status rs_estimate_covariance(rs_stream* s, const rs_config* c, rs_result** out);
/* m worker gradients, row-major m x d. */
RS_API rs_status rs_byzantine_aggregate(const double* workers, uint64_t m, int64_t d,
                                        double eps, const rs_config* c, double* out);

RS_API int64_t rs_result_dim(const rs_result* r);
RS_API rs_status rs_result_mu(const rs_result* r, double* out, int64_t cap);
RS_API rs_run_status rs_result_status(const rs_result* r);
RS_API int rs_result_iterations(const rs_result* r);
RS_API uint64_t rs_result_samples_used(const rs_result* r);
RS_API uint64_t rs_result_passes(const rs_result* r);
RS_API uint64_t rs_result_peak_mem_floats(const rs_result* r);
/* mu, status, counters, per-iteration trace and filter history. */
RS_API rs_status rs_result_to_json(const rs_result* r, char** out);
RS_API void rs_result_free(rs_result* r);

/* ---- experiment harness ---- */
RS_API rs_status rs_report_header(char** out);
/* Runs one spec; returns CSV rows without header. no_timing writes
 * wall_ms = 0. The spec's own output path, if any, is appended to. */
RS_API rs_status rs_run_spec(const char* spec_json, int no_timing, char** rows_out);
RS_API rs_status rs_sweep(const char* template_json, const char* grid_json,
                          const char* out_path, int no_timing, uint64_t* rows_written);

#ifdef __cplusplus
}
#endif

#endif /* ROBUSTREAM_ROBUSTREAM_H_ */
