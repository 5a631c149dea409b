/*
 * Copyright 2026 The yolopar Authors
 * SPDX-License-Identifier: Apache-2.0
 */

/*
 * C interface to the yolopar runtime, post-processing pipeline and
 * benchmark harness.
 *
 * Objects are opaque handles created by yp_*_create / yp_*_read and freed
 * by the matching yp_*_destroy. Every fallible call returns a yp_status;
 * on failure a human-readable message for the calling thread is available
 * from yp_last_error() until the next failing call on that thread.
 * Strings returned through char** out-parameters are owned by the caller
 * and released with yp_string_free().
 */

#ifndef YOLOPAR_YOLOPAR_H
#define YOLOPAR_YOLOPAR_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(YOLOPAR_BUILDING_LIBRARY)
#    define YP_API __declspec(dllexport)
#  else
#    define YP_API __declspec(dllimport)
#  endif
#else
#  define YP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum yp_status {
  YP_OK = 0,
  YP_ERR_INVALID_ARGUMENT = 1,
  YP_ERR_IO = 2,
  YP_ERR_BAD_MAGIC = 3,
  YP_ERR_UNSUPPORTED_VERSION = 4,
  YP_ERR_TRUNCATED = 5,
  YP_ERR_MALFORMED = 6,
  YP_ERR_LOOP_BODY = 7,
  YP_ERR_INTERNAL = 8
} yp_status;

typedef enum yp_schedule { YP_SCHEDULE_STATIC = 0, YP_SCHEDULE_DYNAMIC = 1 } yp_schedule;

typedef enum yp_affinity {
  YP_AFFINITY_NONE = 0,
  YP_AFFINITY_SPREAD = 1,
  YP_AFFINITY_CLOSE = 2,
  YP_AFFINITY_MASTER = 3
} yp_affinity;

typedef enum yp_gate_status {
  YP_GATE_PASS = 0,
  YP_GATE_FAIL = 1,
  YP_GATE_SKIPPED = 2
} yp_gate_status;

/* Chunk value meaning "auto": ceil(n / threads) for static, 1 for dynamic. */
#define YP_CHUNK_AUTO 0u

typedef struct yp_pool yp_pool;
typedef struct yp_feature_map yp_feature_map;
typedef struct yp_detections yp_detections;
typedef struct yp_results yp_results;

YP_API const char* yp_version(void);
YP_API const char* yp_status_string(yp_status status);
YP_API const char* yp_last_error(void);
YP_API void yp_string_free(char* text);

YP_API const char* yp_schedule_name(yp_schedule schedule);
YP_API const char* yp_affinity_name(yp_affinity affinity);
/* Returns YP_ERR_INVALID_ARGUMENT for unknown names. */
YP_API yp_status yp_schedule_parse(const char* name, yp_schedule* out);
YP_API yp_status yp_affinity_parse(const char* name, yp_affinity* out);

/* ---- worker pool ------------------------------------------------------ */

typedef struct yp_runtime_config {
  uint32_t num_threads; /* >= 1; the caller counts as one of them */
  yp_affinity affinity;
  uint32_t core_count; /* 0 = detect */
} yp_runtime_config;

YP_API uint32_t yp_detect_core_count(void);

YP_API yp_status yp_pool_create(const yp_runtime_config* config, yp_pool** out);
YP_API void yp_pool_destroy(yp_pool* pool);
YP_API uint32_t yp_pool_num_threads(const yp_pool* pool);
YP_API uint32_t yp_pool_worker_count(const yp_pool* pool);
YP_API yp_affinity yp_pool_effective_affinity(const yp_pool* pool);
/* Empty string when nothing was downgraded. Owned by the pool. */
YP_API const char* yp_pool_warning(const yp_pool* pool);

/* ---- feature maps ----------------------------------------------------- */

YP_API yp_status yp_feature_map_synth(uint64_t seed, uint32_t num_anchors, uint32_t num_class,
                                      yp_feature_map** out);
/* Copies `count` = num_anchors * (5 + num_class) values. */
YP_API yp_status yp_feature_map_from_values(uint32_t num_anchors, uint32_t num_class,
                                            const float* values, size_t count,
                                            yp_feature_map** out);
YP_API yp_status yp_feature_map_read(const char* path, yp_feature_map** out);
YP_API yp_status yp_feature_map_write(const yp_feature_map* map, const char* path);
YP_API void yp_feature_map_destroy(yp_feature_map* map);
YP_API uint32_t yp_feature_map_num_anchors(const yp_feature_map* map);
YP_API uint32_t yp_feature_map_num_class(const yp_feature_map* map);
/* Row-major num_anchors * (5 + num_class) values, owned by the map. */
YP_API const float* yp_feature_map_values(const yp_feature_map* map);

/* ---- post-processing -------------------------------------------------- */

typedef struct yp_detect_params {
  float prob_threshold; /* default 0.25 */
  float nms_threshold;  /* default 0.45 */
  uint32_t target_size; /* 0 = infer from the anchor count (640 for 8400) */
} yp_detect_params;

YP_API void yp_detect_params_init(yp_detect_params* params);

typedef struct yp_proposal {
  float x, y, w, h;
  int32_t label;
  float prob;
  uint32_t anchor_index;
} yp_proposal;

typedef struct yp_stage_timings {
  double proposal_generation_us;
  double total_us;
} yp_stage_timings;

/* pool == NULL runs the sequential reference. */
YP_API yp_status yp_postprocess(const yp_feature_map* map, const yp_detect_params* params,
                                yp_pool* pool, yp_schedule schedule, uint32_t chunk,
                                yp_detections** out, yp_stage_timings* timings);
/* Proposals only (no sort/NMS). pool == NULL runs the sequential reference;
 * the result is in generation order. */
YP_API yp_status yp_generate_proposals(const yp_feature_map* map, const yp_detect_params* params,
                                       yp_pool* pool, yp_schedule schedule, uint32_t chunk,
                                       yp_detections** out);
YP_API void yp_detections_destroy(yp_detections* detections);
YP_API size_t yp_detections_count(const yp_detections* detections);
YP_API const yp_proposal* yp_detections_data(const yp_detections* detections);
/* Proposals generated before sort and NMS (equals count for yp_generate_proposals). */
YP_API size_t yp_detections_proposal_count(const yp_detections* detections);

/* ---- benchmark harness ------------------------------------------------ */

typedef struct yp_bench_case {
  uint32_t threads;
  yp_schedule schedule;
  uint32_t chunk; /* YP_CHUNK_AUTO or >= 1 */
  yp_affinity affinity;
  float prob_threshold;
  float nms_threshold;
  uint32_t background_threads;
  const char* input_path; /* NULL = synthetic input from seed/anchors/classes */
  uint64_t seed;
  uint32_t anchors;
  uint32_t classes;
  uint32_t warmup_iters;  /* >= 1 */
  uint32_t measure_iters; /* >= 5 */
} yp_bench_case;

/* threads 1, static/auto, no affinity, thresholds 0.25/0.45, seed 42,
 * 8400 x 80, warmup 1, measure 5. */
YP_API void yp_bench_case_init(yp_bench_case* bench_case);

typedef struct yp_latency_stats {
  double min_us, median_us, mean_us, p95_us, max_us;
  uint32_t samples;
} yp_latency_stats;

typedef struct yp_bench_result {
  yp_bench_case bench_case; /* input_path is owned by the result set */
  yp_latency_stats proposal_gen;
  yp_latency_stats total;
  uint64_t proposal_count;
  int equivalent;
  uint32_t warning_count;
} yp_bench_result;

typedef struct yp_sweep_grid {
  const uint32_t* threads;
  size_t threads_count;
  const yp_schedule* schedules;
  size_t schedules_count;
  const uint32_t* chunks; /* YP_CHUNK_AUTO allowed */
  size_t chunks_count;
  const yp_affinity* affinities; /* NULL/0 = {none} */
  size_t affinities_count;
  const uint32_t* background; /* NULL/0 = {0} */
  size_t background_count;
} yp_sweep_grid;

/* Called after each case with (done, total, user). */
typedef void (*yp_progress_fn)(size_t done, size_t total, void* user);

YP_API yp_status yp_results_create(yp_results** out);
YP_API void yp_results_destroy(yp_results* results);
YP_API size_t yp_results_size(const yp_results* results);
YP_API yp_status yp_results_get(const yp_results* results, size_t index, yp_bench_result* out);
/* Warning text `w` of result `index`; owned by the result set. */
YP_API const char* yp_results_warning(const yp_results* results, size_t index, size_t w);

/* Runs one case and appends its result. */
YP_API yp_status yp_bench_run_case(const yp_bench_case* bench_case, yp_results* results);
/* Runs the grid over `base` (one case at a time) and appends every result. */
YP_API yp_status yp_sweep(const yp_sweep_grid* grid, const yp_bench_case* base,
                          yp_progress_fn progress, void* user, yp_results* results);
/* Default sweep: replica, affinity (static/124) and contention grids; core_count 0 = detect. */
YP_API yp_status yp_sweep_default(const yp_bench_case* base, uint32_t core_count,
                                  yp_progress_fn progress, void* user, yp_results* results);

/* Comma-separated CSV header. */
YP_API const char* yp_csv_columns(void);
YP_API yp_status yp_results_write_csv(const yp_results* results, const char* path);
YP_API yp_status yp_results_read_csv(const char* path, yp_results** out);

typedef struct yp_trend_summary {
  yp_gate_status speedup;
  yp_gate_status concavity;
  yp_gate_status oversubscription;
  yp_gate_status contention;
  int any_failed;
} yp_trend_summary;

/* host_cores 0 = unknown. `text` may be NULL. */
YP_API yp_status yp_trend_report(const yp_results* results, uint32_t host_cores,
                                 yp_trend_summary* summary, char** text);

typedef struct yp_verify_options {
  const char* input_path; /* NULL = synthetic */
  uint64_t seed;
  uint32_t anchors;
  uint32_t classes;
  float prob_threshold;
  float nms_threshold;
  uint32_t property_trials;
} yp_verify_options;

YP_API void yp_verify_options_init(yp_verify_options* options);
/* *passed is 1 when every check passed. `text` may be NULL. */
YP_API yp_status yp_verify(const yp_verify_options* options, int* passed, char** text);

#ifdef __cplusplus
}
#endif

#endif /* YOLOPAR_YOLOPAR_H */
