/* Copyright 2026 The IVR Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface of the interleaved visual reasoning data engine.
 *
 * Every function returns an ivr_status. On failure ivr_last_error() holds a
 * message for the calling thread until its next call into the library.
 * Strings returned through char** are owned by the caller and released with
 * ivr_string_free().
 */
#ifndef IVR_IVR_H_
#define IVR_IVR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IVR_API __declspec(dllexport)
#else
#define IVR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ivr_status {
  IVR_OK = 0,
  IVR_ERR_INVALID_ARGUMENT = 1,
  IVR_ERR_CONFIG = 2,
  IVR_ERR_IO = 3,
  IVR_ERR_PARSE = 4,
  IVR_ERR_UNPARSEABLE = 5,
  IVR_ERR_REPLAY_MISS = 6,
  IVR_ERR_EXHAUSTED_RETRIES = 7,
  IVR_ERR_DIM_MISMATCH = 8,
  IVR_ERR_OUT_OF_RANGE = 9,
  IVR_ERR_EMPTY = 10,
  IVR_ERR_NOT_FOUND = 11,
  IVR_ERR_CONFLICT = 12,
  IVR_ERR_WRONG_ATTEMPT_COUNT = 13,
  IVR_ERR_UNKNOWN_CATEGORY = 14,
  IVR_ERR_LEAKAGE_UNAVOIDABLE = 15,
  IVR_ERR_INCONSISTENT_CHAIN = 16,
  IVR_ERR_INSUFFICIENT_POOL = 17,
  IVR_ERR_UNASSIGNED_CATEGORY = 18,
  IVR_ERR_EMPTY_VALID_REGION = 19,
  IVR_ERR_MALFORMED_RESPONSE = 20,
  IVR_ERR_INTERNAL = 99
} ivr_status;

typedef struct ivr_engine ivr_engine;
typedef struct ivr_review_server ivr_review_server;

IVR_API const char* ivr_version(void);
IVR_API const char* ivr_last_error(void);
/* Symbolic name, e.g. "ReplayMiss". */
IVR_API const char* ivr_status_name(ivr_status status);
IVR_API void ivr_string_free(char* s);

/* ---- engine ---------------------------------------------------------- */

IVR_API ivr_status ivr_engine_open(const char* config_path, ivr_engine** out);
/* base_dir resolves relative paths in the config; NULL means ".". */
IVR_API ivr_status ivr_engine_open_json(const char* config_json, const char* base_dir, ivr_engine** out);
IVR_API void ivr_engine_close(ivr_engine* engine);
/* Overrides; take effect for the next stage call. workers 0 = all cores. */
IVR_API ivr_status ivr_engine_set_workers(ivr_engine* engine, int workers);
IVR_API ivr_status ivr_engine_set_seed(ivr_engine* engine, int64_t seed);
/* "live", "record" or "replay". */
IVR_API ivr_status ivr_engine_set_mode(ivr_engine* engine, const char* mode);
/* Effective configuration as JSON. */
IVR_API ivr_status ivr_engine_config(ivr_engine* engine, char** config_json);

/* Stages. Each writes JSON-Lines to `out` and returns a JSON summary. */
IVR_API ivr_status ivr_route(ivr_engine* engine, const char* manifest, const char* out, char** summary);
/* media_dir may be NULL: media URIs then resolve against the input's directory. */
IVR_API ivr_status ivr_render(ivr_engine* engine, const char* routed, const char* out, const char* media_dir,
                              char** summary);
IVR_API ivr_status ivr_verify(ivr_engine* engine, const char* rendered, const char* out, char** summary);
IVR_API ivr_status ivr_backfill(ivr_engine* engine, const char* verified, const char* out, char** summary);
/* queue_out and decisions may be NULL. */
IVR_API ivr_status ivr_assemble(ivr_engine* engine, const char* tuples, const char* out, const char* queue_out,
                                const char* decisions, char** summary);
/* All stages into out_dir; the summary carries output digests. */
IVR_API ivr_status ivr_pipeline(ivr_engine* engine, const char* manifest, const char* out_dir, const char* media_dir,
                                char** summary);

/* Composition (and routing / stage statistics when present). `text` selects a
 * human-readable table instead of JSON. */
IVR_API ivr_status ivr_stats(const char* manifest, int text, char** out);

/* engine may be NULL for the default protocol; protocol overrides its name
 * when non-NULL ("vsi" or "spar"); tiers, out and format may be NULL.
 * format is "json" or "markdown". */
IVR_API ivr_status ivr_eval(ivr_engine* engine, const char* preds, const char* gold, const char* tiers,
                            const char* protocol, const char* out, const char* format, char** report_json);

/* ---- numeric kernels ------------------------------------------------- */

IVR_API ivr_status ivr_kernels_selfcheck(uint64_t seed, char** report_json, int* all_pass);
IVR_API ivr_status ivr_shift_timestep(double u, double mu, int reciprocal, double* t);
IVR_API ivr_status ivr_lr_at(int64_t step, double peak_lr, double min_lr, int64_t total_steps, int64_t warmup_steps,
                             double* lr);
IVR_API ivr_status ivr_mra(double pred, double gold, double* score);
/* grad may be NULL; otherwise it receives n values. */
IVR_API ivr_status ivr_flow_loss(const double* v_pred, const double* z0, const double* z1, size_t n, double* loss,
                                 double* grad);
/* kinds[i]: 0 text, 1 image. out holds total*total cells, row-major. */
IVR_API ivr_status ivr_hybrid_mask(const int* kinds, const size_t* lengths, size_t n_spans, uint8_t* out,
                                   size_t out_cells, size_t* total);

/* ---- fixtures -------------------------------------------------------- */

IVR_API ivr_status ivr_fixture_reference_composition(const char* path);
IVR_API ivr_status ivr_fixture_replay(const char* dir, size_t n_samples, uint64_t seed, char** summary);

/* ---- review server --------------------------------------------------- */

/* log may be NULL (decisions kept in memory); port 0 picks a free port;
 * token NULL reads IVR_REVIEW_TOKEN, "" disables auth. */
IVR_API ivr_status ivr_review_serve_start(const char* queue, const char* log, const char* host, int port,
                                          const char* static_dir, const char* token, ivr_review_server** out);
IVR_API int ivr_review_server_port(const ivr_review_server* server);
/* Stops serving and frees the handle. */
IVR_API void ivr_review_server_stop(ivr_review_server* server);

#ifdef __cplusplus
}
#endif

#endif /* IVR_IVR_H_ */
