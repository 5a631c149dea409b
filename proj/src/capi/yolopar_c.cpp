// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

// extern "C" surface over the C++ core. Exceptions never cross this
// boundary: each entry point translates them into a yp_status and stores
// the message in a thread-local slot read by yp_last_error().

#include <yolopar/yolopar.h>

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <yolopar/bench.hpp>

using namespace yolopar;

struct yp_pool {
  explicit yp_pool(const RuntimeConfig& config) : pool(config) {}
  WorkerPool pool;
};

struct yp_feature_map {
  FeatureMap map;
};

struct yp_detections {
  std::vector<yp_proposal> items;
  std::size_t proposal_count = 0;
};

struct yp_results {
  std::vector<BenchResult> results;
  std::vector<std::string> input_paths;  // parallel to results; empty for synthetic input

  void append(BenchResult r) {
    const auto* path = std::get_if<std::filesystem::path>(&r.bench_case.input);
    input_paths.push_back(path ? path->string() : std::string());
    results.push_back(std::move(r));
  }
};

namespace {

thread_local std::string g_last_error;

yp_status fail(yp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

yp_status from_fmap(FmapErrc code) {
  switch (code) {
    case FmapErrc::io_error:
      return YP_ERR_IO;
    case FmapErrc::bad_magic:
      return YP_ERR_BAD_MAGIC;
    case FmapErrc::unsupported_version:
      return YP_ERR_UNSUPPORTED_VERSION;
    case FmapErrc::truncated:
      return YP_ERR_TRUNCATED;
    case FmapErrc::malformed_header:
    case FmapErrc::trailing_data:
      return YP_ERR_MALFORMED;
  }
  return YP_ERR_INTERNAL;
}

/// Runs `fn`, mapping exceptions to status codes. Generic runtime errors map
/// to `fallback`.
template <class Fn>
yp_status guard(yp_status fallback, Fn&& fn) noexcept {
  try {
    fn();
    return YP_OK;
  } catch (const FmapError& e) {
    return fail(from_fmap(e.code()), e.what());
  } catch (const LoopError& e) {
    return fail(YP_ERR_LOOP_BODY, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(YP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(YP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(fallback, e.what());
  } catch (...) {
    return fail(YP_ERR_INTERNAL, "unknown exception");
  }
}

#define YP_REQUIRE(cond, what) \
  do {                         \
    if (!(cond)) return fail(YP_ERR_INVALID_ARGUMENT, what); \
  } while (0)

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

SchedulePolicy to_cpp(yp_schedule s) {
  switch (s) {
    case YP_SCHEDULE_STATIC:
      return SchedulePolicy::Static;
    case YP_SCHEDULE_DYNAMIC:
      return SchedulePolicy::Dynamic;
  }
  throw std::invalid_argument("unknown schedule value");
}

AffinityPolicy to_cpp(yp_affinity a) {
  switch (a) {
    case YP_AFFINITY_NONE:
      return AffinityPolicy::None;
    case YP_AFFINITY_SPREAD:
      return AffinityPolicy::Spread;
    case YP_AFFINITY_CLOSE:
      return AffinityPolicy::Close;
    case YP_AFFINITY_MASTER:
      return AffinityPolicy::Master;
  }
  throw std::invalid_argument("unknown affinity value");
}

yp_schedule to_c(SchedulePolicy s) {
  return s == SchedulePolicy::Static ? YP_SCHEDULE_STATIC : YP_SCHEDULE_DYNAMIC;
}

yp_affinity to_c(AffinityPolicy a) {
  switch (a) {
    case AffinityPolicy::None:
      return YP_AFFINITY_NONE;
    case AffinityPolicy::Spread:
      return YP_AFFINITY_SPREAD;
    case AffinityPolicy::Close:
      return YP_AFFINITY_CLOSE;
    case AffinityPolicy::Master:
      return YP_AFFINITY_MASTER;
  }
  return YP_AFFINITY_NONE;
}

yp_gate_status to_c(GateStatus s) {
  switch (s) {
    case GateStatus::Pass:
      return YP_GATE_PASS;
    case GateStatus::Fail:
      return YP_GATE_FAIL;
    case GateStatus::Skipped:
      return YP_GATE_SKIPPED;
  }
  return YP_GATE_SKIPPED;
}

ScheduleSpec schedule_of(yp_schedule schedule, uint32_t chunk) {
  ScheduleSpec spec{to_cpp(schedule), std::nullopt};
  if (chunk != YP_CHUNK_AUTO) spec.chunk = chunk;
  return spec;
}

InputSource input_of(const char* path, uint64_t seed, uint32_t anchors, uint32_t classes) {
  if (path) return std::filesystem::path(path);
  return SynthSpec{seed, anchors, classes};
}

BenchCase to_cpp(const yp_bench_case& c) {
  BenchCase out;
  out.threads = c.threads;
  out.schedule = schedule_of(c.schedule, c.chunk);
  out.affinity = to_cpp(c.affinity);
  out.prob_threshold = c.prob_threshold;
  out.nms_threshold = c.nms_threshold;
  out.background_threads = c.background_threads;
  out.input = input_of(c.input_path, c.seed, c.anchors, c.classes);
  out.warmup_iters = c.warmup_iters;
  out.measure_iters = c.measure_iters;
  return out;
}

yp_latency_stats to_c(const LatencyStats& s) {
  return {s.min_us, s.median_us, s.mean_us, s.p95_us, s.max_us, static_cast<uint32_t>(s.samples)};
}

DetectParams params_for(const FeatureMap& feat, const yp_detect_params* params) {
  yp_detect_params p;
  yp_detect_params_init(&p);
  if (params) p = *params;
  if (p.target_size == 0) return detect_params_for(feat, p.prob_threshold, p.nms_threshold);
  DetectParams out;
  out.prob_threshold = p.prob_threshold;
  out.nms_threshold = p.nms_threshold;
  out.target_size = static_cast<int>(p.target_size);
  validate(out);
  return out;
}

yp_proposal to_c(const Proposal& p) {
  return {p.rect.x, p.rect.y, p.rect.w, p.rect.h, p.label, p.prob, p.anchor_index};
}

}  // namespace

extern "C" {

YP_API const char* yp_version(void) { return "0.1.0"; }

YP_API const char* yp_status_string(yp_status status) {
  switch (status) {
    case YP_OK:
      return "ok";
    case YP_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case YP_ERR_IO:
      return "i/o error";
    case YP_ERR_BAD_MAGIC:
      return "bad magic";
    case YP_ERR_UNSUPPORTED_VERSION:
      return "unsupported version";
    case YP_ERR_TRUNCATED:
      return "truncated";
    case YP_ERR_MALFORMED:
      return "malformed";
    case YP_ERR_LOOP_BODY:
      return "loop body failed";
    case YP_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

YP_API const char* yp_last_error(void) { return g_last_error.c_str(); }

YP_API void yp_string_free(char* text) { std::free(text); }

YP_API const char* yp_schedule_name(yp_schedule schedule) {
  return schedule == YP_SCHEDULE_DYNAMIC ? "dynamic" : "static";
}

YP_API const char* yp_affinity_name(yp_affinity affinity) {
  try {
    return to_string(to_cpp(affinity));
  } catch (...) {
    return "?";
  }
}

YP_API yp_status yp_schedule_parse(const char* name, yp_schedule* out) {
  YP_REQUIRE(name && out, "null argument");
  const auto policy = parse_schedule_policy(name);
  if (!policy) return fail(YP_ERR_INVALID_ARGUMENT, std::string("unknown schedule: ") + name);
  *out = to_c(*policy);
  return YP_OK;
}

YP_API yp_status yp_affinity_parse(const char* name, yp_affinity* out) {
  YP_REQUIRE(name && out, "null argument");
  const auto policy = parse_affinity_policy(name);
  if (!policy) return fail(YP_ERR_INVALID_ARGUMENT, std::string("unknown affinity: ") + name);
  *out = to_c(*policy);
  return YP_OK;
}

YP_API uint32_t yp_detect_core_count(void) {
  try {
    return static_cast<uint32_t>(detect_core_count());
  } catch (...) {
    return 1;
  }
}

YP_API yp_status yp_pool_create(const yp_runtime_config* config, yp_pool** out) {
  YP_REQUIRE(config && out, "null argument");
  *out = nullptr;
  return guard(YP_ERR_INTERNAL, [&] {
    *out = new yp_pool(RuntimeConfig{config->num_threads, to_cpp(config->affinity),
                                     config->core_count});
  });
}

YP_API void yp_pool_destroy(yp_pool* pool) { delete pool; }

YP_API uint32_t yp_pool_num_threads(const yp_pool* pool) {
  return pool ? static_cast<uint32_t>(pool->pool.num_threads()) : 0;
}

YP_API uint32_t yp_pool_worker_count(const yp_pool* pool) {
  return pool ? static_cast<uint32_t>(pool->pool.worker_count()) : 0;
}

YP_API yp_affinity yp_pool_effective_affinity(const yp_pool* pool) {
  return pool ? to_c(pool->pool.effective_affinity()) : YP_AFFINITY_NONE;
}

YP_API const char* yp_pool_warning(const yp_pool* pool) {
  return pool ? pool->pool.warning().c_str() : "";
}

YP_API yp_status yp_feature_map_synth(uint64_t seed, uint32_t num_anchors, uint32_t num_class,
                                      yp_feature_map** out) {
  YP_REQUIRE(out, "null argument");
  *out = nullptr;
  return guard(YP_ERR_INTERNAL, [&] {
    *out = new yp_feature_map{synth_feature_map({seed, num_anchors, num_class})};
  });
}

YP_API yp_status yp_feature_map_from_values(uint32_t num_anchors, uint32_t num_class,
                                            const float* values, size_t count,
                                            yp_feature_map** out) {
  YP_REQUIRE(out && (values || count == 0), "null argument");
  *out = nullptr;
  return guard(YP_ERR_INTERNAL, [&] {
    *out = new yp_feature_map{
        FeatureMap(num_anchors, num_class, std::vector<float>(values, values + count))};
  });
}

YP_API yp_status yp_feature_map_read(const char* path, yp_feature_map** out) {
  YP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  return guard(YP_ERR_IO, [&] { *out = new yp_feature_map{read_feature_map(path)}; });
}

YP_API yp_status yp_feature_map_write(const yp_feature_map* map, const char* path) {
  YP_REQUIRE(map && path, "null argument");
  return guard(YP_ERR_IO, [&] { write_feature_map(map->map, path); });
}

YP_API void yp_feature_map_destroy(yp_feature_map* map) { delete map; }

YP_API uint32_t yp_feature_map_num_anchors(const yp_feature_map* map) {
  return map ? static_cast<uint32_t>(map->map.num_anchors()) : 0;
}

YP_API uint32_t yp_feature_map_num_class(const yp_feature_map* map) {
  return map ? static_cast<uint32_t>(map->map.num_class()) : 0;
}

YP_API const float* yp_feature_map_values(const yp_feature_map* map) {
  return map ? map->map.values().data() : nullptr;
}

YP_API void yp_detect_params_init(yp_detect_params* params) {
  if (!params) return;
  params->prob_threshold = 0.25f;
  params->nms_threshold = 0.45f;
  params->target_size = 0;
}

YP_API yp_status yp_postprocess(const yp_feature_map* map, const yp_detect_params* params,
                                yp_pool* pool, yp_schedule schedule, uint32_t chunk,
                                yp_detections** out, yp_stage_timings* timings) {
  YP_REQUIRE(map && out, "null argument");
  *out = nullptr;
  return guard(YP_ERR_INTERNAL, [&] {
    const DetectParams p = params_for(map->map, params);
    Executor executor = SequentialExecutor{};
    if (pool) executor = ParallelExecutor{&pool->pool, schedule_of(schedule, chunk)};
    auto result = postprocess(map->map, p, executor);

    auto dets = std::make_unique<yp_detections>();
    dets->items.reserve(result.detections.size());
    for (const auto& d : result.detections) dets->items.push_back(to_c(d));
    dets->proposal_count = result.proposal_count;
    if (timings) {
      timings->proposal_generation_us =
          static_cast<double>(result.timings.proposal_generation.count()) / 1000.0;
      timings->total_us = static_cast<double>(result.timings.total.count()) / 1000.0;
    }
    *out = dets.release();
  });
}

YP_API yp_status yp_generate_proposals(const yp_feature_map* map, const yp_detect_params* params,
                                       yp_pool* pool, yp_schedule schedule, uint32_t chunk,
                                       yp_detections** out) {
  YP_REQUIRE(map && out, "null argument");
  *out = nullptr;
  return guard(YP_ERR_INTERNAL, [&] {
    const DetectParams p = params_for(map->map, params);
    const auto grid = generate_grid_strides(p.target_size, p.strides);
    const auto proposals =
        pool ? generate_proposals_par(pool->pool, schedule_of(schedule, chunk), grid, map->map,
                                      p.prob_threshold)
             : generate_proposals_seq(grid, map->map, p.prob_threshold);
    auto dets = std::make_unique<yp_detections>();
    dets->items.reserve(proposals.size());
    for (const auto& d : proposals) dets->items.push_back(to_c(d));
    dets->proposal_count = proposals.size();
    *out = dets.release();
  });
}

YP_API void yp_detections_destroy(yp_detections* detections) { delete detections; }

YP_API size_t yp_detections_count(const yp_detections* detections) {
  return detections ? detections->items.size() : 0;
}

YP_API const yp_proposal* yp_detections_data(const yp_detections* detections) {
  return detections ? detections->items.data() : nullptr;
}

YP_API size_t yp_detections_proposal_count(const yp_detections* detections) {
  return detections ? detections->proposal_count : 0;
}

YP_API void yp_bench_case_init(yp_bench_case* c) {
  if (!c) return;
  *c = yp_bench_case{};
  c->threads = 1;
  c->schedule = YP_SCHEDULE_STATIC;
  c->chunk = YP_CHUNK_AUTO;
  c->affinity = YP_AFFINITY_NONE;
  c->prob_threshold = 0.25f;
  c->nms_threshold = 0.45f;
  c->background_threads = 0;
  c->input_path = nullptr;
  c->seed = 42;
  c->anchors = 8400;
  c->classes = 80;
  c->warmup_iters = 1;
  c->measure_iters = 5;
}

YP_API yp_status yp_results_create(yp_results** out) {
  YP_REQUIRE(out, "null argument");
  *out = nullptr;
  return guard(YP_ERR_INTERNAL, [&] { *out = new yp_results(); });
}

YP_API void yp_results_destroy(yp_results* results) { delete results; }

YP_API size_t yp_results_size(const yp_results* results) {
  return results ? results->results.size() : 0;
}

YP_API yp_status yp_results_get(const yp_results* results, size_t index, yp_bench_result* out) {
  YP_REQUIRE(results && out, "null argument");
  YP_REQUIRE(index < results->results.size(), "result index out of range");
  const BenchResult& r = results->results[index];
  const BenchCase& c = r.bench_case;

  yp_bench_result res{};
  yp_bench_case_init(&res.bench_case);
  res.bench_case.threads = static_cast<uint32_t>(c.threads);
  res.bench_case.schedule = to_c(c.schedule.policy);
  res.bench_case.chunk = c.schedule.chunk ? static_cast<uint32_t>(*c.schedule.chunk) : YP_CHUNK_AUTO;
  res.bench_case.affinity = to_c(c.affinity);
  res.bench_case.prob_threshold = c.prob_threshold;
  res.bench_case.nms_threshold = c.nms_threshold;
  res.bench_case.background_threads = static_cast<uint32_t>(c.background_threads);
  if (const auto* synth = std::get_if<SynthSpec>(&c.input)) {
    res.bench_case.seed = synth->seed;
    res.bench_case.anchors = static_cast<uint32_t>(synth->num_anchors);
    res.bench_case.classes = static_cast<uint32_t>(synth->num_class);
  } else {
    res.bench_case.input_path = results->input_paths[index].c_str();
  }
  res.bench_case.warmup_iters = static_cast<uint32_t>(c.warmup_iters);
  res.bench_case.measure_iters = static_cast<uint32_t>(c.measure_iters);
  res.proposal_gen = to_c(r.proposal_gen);
  res.total = to_c(r.total);
  res.proposal_count = r.proposal_count;
  res.equivalent = r.equivalent ? 1 : 0;
  res.warning_count = static_cast<uint32_t>(r.warnings.size());
  *out = res;
  return YP_OK;
}

YP_API const char* yp_results_warning(const yp_results* results, size_t index, size_t w) {
  if (!results || index >= results->results.size()) return "";
  const auto& warnings = results->results[index].warnings;
  return w < warnings.size() ? warnings[w].c_str() : "";
}

YP_API yp_status yp_bench_run_case(const yp_bench_case* bench_case, yp_results* results) {
  YP_REQUIRE(bench_case && results, "null argument");
  return guard(YP_ERR_INTERNAL, [&] { results->append(run_case(to_cpp(*bench_case))); });
}

YP_API yp_status yp_sweep(const yp_sweep_grid* grid, const yp_bench_case* base,
                          yp_progress_fn progress, void* user, yp_results* results) {
  YP_REQUIRE(grid && base && results, "null argument");
  YP_REQUIRE(grid->threads_count && grid->schedules_count && grid->chunks_count,
             "sweep grid must not be empty");
  YP_REQUIRE(grid->threads && grid->schedules && grid->chunks, "null grid axis");
  return guard(YP_ERR_INTERNAL, [&] {
    SweepGrid g;
    g.threads.assign(grid->threads, grid->threads + grid->threads_count);
    g.policies.clear();
    for (size_t i = 0; i < grid->schedules_count; ++i) g.policies.push_back(to_cpp(grid->schedules[i]));
    for (size_t i = 0; i < grid->chunks_count; ++i) {
      g.chunks.push_back(grid->chunks[i] == YP_CHUNK_AUTO ? std::nullopt
                                                          : std::optional<std::size_t>(grid->chunks[i]));
    }
    if (grid->affinities && grid->affinities_count) {
      g.affinities.clear();
      for (size_t i = 0; i < grid->affinities_count; ++i) {
        g.affinities.push_back(to_cpp(grid->affinities[i]));
      }
    }
    if (grid->background && grid->background_count) {
      g.background.assign(grid->background, grid->background + grid->background_count);
    }
    const auto cases = expand(g, to_cpp(*base));
    for (const auto& c : cases) validate(c);
    for (auto& r : sweep(cases, [&](std::size_t done, std::size_t total, const BenchResult&) {
           if (progress) progress(done, total, user);
         })) {
      results->append(std::move(r));
    }
  });
}

YP_API yp_status yp_sweep_default(const yp_bench_case* base, uint32_t core_count,
                                  yp_progress_fn progress, void* user, yp_results* results) {
  YP_REQUIRE(base && results, "null argument");
  return guard(YP_ERR_INTERNAL, [&] {
    const std::size_t cores = core_count ? core_count : detect_core_count();
    const auto cases = default_sweep_cases(to_cpp(*base), cores);
    for (const auto& c : cases) validate(c);
    for (auto& r : sweep(cases, [&](std::size_t done, std::size_t total, const BenchResult&) {
           if (progress) progress(done, total, user);
         })) {
      results->append(std::move(r));
    }
  });
}

YP_API const char* yp_csv_columns(void) {
  static const std::string header = [] {
    std::string h;
    for (auto c : csv_columns()) {
      if (!h.empty()) h += ',';
      h += c;
    }
    return h;
  }();
  return header.c_str();
}

YP_API yp_status yp_results_write_csv(const yp_results* results, const char* path) {
  YP_REQUIRE(results && path, "null argument");
  return guard(YP_ERR_IO, [&] { emit_csv(results->results, path); });
}

YP_API yp_status yp_results_read_csv(const char* path, yp_results** out) {
  YP_REQUIRE(path && out, "null argument");
  *out = nullptr;
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    return fail(YP_ERR_IO, std::string("cannot open ") + path);
  }
  return guard(YP_ERR_MALFORMED, [&] {
    auto set = std::make_unique<yp_results>();
    for (auto& r : read_csv(path)) set->append(std::move(r));
    *out = set.release();
  });
}

YP_API yp_status yp_trend_report(const yp_results* results, uint32_t host_cores,
                                 yp_trend_summary* summary, char** text) {
  YP_REQUIRE(results, "null argument");
  if (text) *text = nullptr;
  return guard(YP_ERR_INTERNAL, [&] {
    const auto report = trend_report(results->results, TrendOptions{host_cores});
    if (summary) {
      summary->speedup = to_c(report.gates[0].status);
      summary->concavity = to_c(report.gates[1].status);
      summary->oversubscription = to_c(report.gates[2].status);
      summary->contention = to_c(report.gates[3].status);
      summary->any_failed = report.any_failed() ? 1 : 0;
    }
    if (text) *text = dup_string(report.text);
  });
}

YP_API void yp_verify_options_init(yp_verify_options* options) {
  if (!options) return;
  options->input_path = nullptr;
  options->seed = 42;
  options->anchors = 8400;
  options->classes = 80;
  options->prob_threshold = 0.25f;
  options->nms_threshold = 0.45f;
  options->property_trials = 50;
}

YP_API yp_status yp_verify(const yp_verify_options* options, int* passed, char** text) {
  YP_REQUIRE(options && passed, "null argument");
  if (text) *text = nullptr;
  return guard(YP_ERR_INTERNAL, [&] {
    VerifyOptions v;
    v.input = input_of(options->input_path, options->seed, options->anchors, options->classes);
    v.prob_threshold = options->prob_threshold;
    v.nms_threshold = options->nms_threshold;
    v.property_trials = options->property_trials;
    const auto report = verify_suite(v);
    *passed = report.passed() ? 1 : 0;
    if (text) *text = dup_string(report.text());
  });
}

}  // extern "C"
