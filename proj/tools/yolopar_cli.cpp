// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

// yolopar-bench: command-line driver over the yolopar C interface.
//
//   verify   equivalence + property suite over the configuration grid
//   bench    one measured case
//   sweep    configuration grid -> CSV
//   report   CSV -> trend report
//   gen      write a synthetic FMAP file
//
// Exit status: 0 success, 1 verification/equivalence/strict-gate failure or
// runtime error, 2 usage error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <yolopar/yolopar.h>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::vector<uint32_t> threads;
  std::vector<std::string> schedules;
  std::vector<std::string> chunks;
  std::vector<std::string> affinities;
  std::vector<uint32_t> background;
  float prob_threshold = 0.25f;
  float nms_threshold = 0.45f;
  uint64_t seed = 42;
  uint32_t anchors = 8400;
  uint32_t classes = 80;
  std::string input;
  uint32_t warmup = 1;
  uint32_t iters = 5;
  uint32_t trials = 50;
  uint32_t cores = 0;
  std::string out;
  bool strict = false;
};

struct UsageError {
  std::string message;
};

int report_status(yp_status status, const char* what) {
  std::cerr << "error: " << what << ": " << yp_status_string(status) << ": " << yp_last_error()
            << "\n";
  return kExitFailure;
}

uint32_t parse_chunk(const std::string& text) {
  if (text == "auto") return YP_CHUNK_AUTO;
  try {
    std::size_t used = 0;
    const unsigned long value = std::stoul(text, &used);
    if (used == text.size() && value >= 1 && value <= UINT32_MAX) return static_cast<uint32_t>(value);
  } catch (const std::exception&) {
  }
  throw UsageError{"--chunk expects a positive integer or 'auto', got '" + text + "'"};
}

yp_schedule parse_schedule(const std::string& text) {
  yp_schedule s;
  if (yp_schedule_parse(text.c_str(), &s) != YP_OK) {
    throw UsageError{"--schedule expects static|dynamic, got '" + text + "'"};
  }
  return s;
}

yp_affinity parse_affinity(const std::string& text) {
  yp_affinity a;
  if (yp_affinity_parse(text.c_str(), &a) != YP_OK) {
    throw UsageError{"--affinity expects none|spread|close|master, got '" + text + "'"};
  }
  return a;
}

yp_bench_case base_case(const Options& o) {
  yp_bench_case c;
  yp_bench_case_init(&c);
  c.prob_threshold = o.prob_threshold;
  c.nms_threshold = o.nms_threshold;
  c.input_path = o.input.empty() ? nullptr : o.input.c_str();
  c.seed = o.seed;
  c.anchors = o.anchors;
  c.classes = o.classes;
  c.warmup_iters = o.warmup;
  c.measure_iters = o.iters;
  return c;
}

std::string chunk_text(uint32_t chunk) {
  return chunk == YP_CHUNK_AUTO ? "auto" : std::to_string(chunk);
}

void print_result(const yp_results* results, size_t index) {
  yp_bench_result r;
  if (yp_results_get(results, index, &r) != YP_OK) return;
  std::printf(
      "threads=%u schedule=%s chunk=%s affinity=%s background=%u gen_median_us=%.3f "
      "gen_p95_us=%.3f total_median_us=%.3f total_p95_us=%.3f proposals=%llu equivalent=%s\n",
      r.bench_case.threads, yp_schedule_name(r.bench_case.schedule),
      chunk_text(r.bench_case.chunk).c_str(), yp_affinity_name(r.bench_case.affinity),
      r.bench_case.background_threads, r.proposal_gen.median_us, r.proposal_gen.p95_us,
      r.total.median_us, r.total.p95_us, static_cast<unsigned long long>(r.proposal_count),
      r.equivalent ? "true" : "false");
  for (uint32_t w = 0; w < r.warning_count; ++w) {
    std::fprintf(stderr, "warning: %s\n", yp_results_warning(results, index, w));
  }
}

bool all_equivalent(const yp_results* results) {
  for (size_t i = 0; i < yp_results_size(results); ++i) {
    yp_bench_result r;
    if (yp_results_get(results, i, &r) != YP_OK || !r.equivalent) return false;
  }
  return true;
}

int run_gen(const Options& o) {
  if (o.out.empty()) throw UsageError{"gen requires --out PATH"};
  yp_feature_map* map = nullptr;
  if (auto s = yp_feature_map_synth(o.seed, o.anchors, o.classes, &map); s != YP_OK) {
    return report_status(s, "synthesizing feature map");
  }
  const yp_status s = yp_feature_map_write(map, o.out.c_str());
  yp_feature_map_destroy(map);
  if (s != YP_OK) return report_status(s, "writing feature map");
  std::printf("wrote %s (%u anchors x %u classes, seed %llu)\n", o.out.c_str(), o.anchors,
              o.classes, static_cast<unsigned long long>(o.seed));
  return 0;
}

int run_bench(const Options& o) {
  if (o.threads.size() > 1 || o.schedules.size() > 1 || o.chunks.size() > 1 ||
      o.affinities.size() > 1 || o.background.size() > 1) {
    throw UsageError{"bench takes single values; use sweep for lists"};
  }
  yp_bench_case c = base_case(o);
  if (!o.threads.empty()) c.threads = o.threads[0];
  if (!o.schedules.empty()) c.schedule = parse_schedule(o.schedules[0]);
  if (!o.chunks.empty()) c.chunk = parse_chunk(o.chunks[0]);
  if (!o.affinities.empty()) c.affinity = parse_affinity(o.affinities[0]);
  if (!o.background.empty()) c.background_threads = o.background[0];

  yp_results* results = nullptr;
  if (auto s = yp_results_create(&results); s != YP_OK) return report_status(s, "allocating");
  int code = 0;
  if (auto s = yp_bench_run_case(&c, results); s != YP_OK) {
    code = report_status(s, "running case");
  } else {
    print_result(results, 0);
    if (!o.out.empty()) {
      if (auto w = yp_results_write_csv(results, o.out.c_str()); w != YP_OK) {
        code = report_status(w, "writing CSV");
      }
    }
    if (code == 0 && !all_equivalent(results)) code = kExitFailure;
  }
  yp_results_destroy(results);
  return code;
}

int run_sweep(const Options& o) {
  if (o.out.empty()) throw UsageError{"sweep requires --out PATH"};
  const yp_bench_case base = base_case(o);
  yp_results* results = nullptr;
  if (auto s = yp_results_create(&results); s != YP_OK) return report_status(s, "allocating");

  auto progress = [](size_t done, size_t total, void*) {
    std::fprintf(stderr, "\r[%zu/%zu]", done, total);
    if (done == total) std::fputc('\n', stderr);
  };

  yp_status status;
  const bool custom = !o.threads.empty() || !o.schedules.empty() || !o.chunks.empty() ||
                      !o.affinities.empty() || !o.background.empty();
  if (!custom) {
    status = yp_sweep_default(&base, o.cores, progress, nullptr, results);
  } else {
    std::vector<uint32_t> threads = o.threads;
    if (threads.empty()) threads = {1, 2, 4, 8, 16, 32};
    std::vector<yp_schedule> schedules;
    for (const auto& s : o.schedules) schedules.push_back(parse_schedule(s));
    if (schedules.empty()) schedules = {YP_SCHEDULE_STATIC, YP_SCHEDULE_DYNAMIC};
    std::vector<uint32_t> chunks;
    for (const auto& c : o.chunks) chunks.push_back(parse_chunk(c));
    if (chunks.empty()) chunks = {1, 8, 32, 124, 512, 2048, 8400};
    std::vector<yp_affinity> affinities;
    for (const auto& a : o.affinities) affinities.push_back(parse_affinity(a));
    std::vector<uint32_t> background = o.background;

    yp_sweep_grid grid{};
    grid.threads = threads.data();
    grid.threads_count = threads.size();
    grid.schedules = schedules.data();
    grid.schedules_count = schedules.size();
    grid.chunks = chunks.data();
    grid.chunks_count = chunks.size();
    grid.affinities = affinities.data();
    grid.affinities_count = affinities.size();
    grid.background = background.data();
    grid.background_count = background.size();
    status = yp_sweep(&grid, &base, progress, nullptr, results);
  }

  int code = 0;
  if (status != YP_OK) {
    code = report_status(status, "sweep");
  } else if (auto w = yp_results_write_csv(results, o.out.c_str()); w != YP_OK) {
    code = report_status(w, "writing CSV");
  } else {
    std::printf("wrote %zu results to %s\n", yp_results_size(results), o.out.c_str());
    for (size_t i = 0; i < yp_results_size(results); ++i) {
      yp_bench_result r;
      yp_results_get(results, i, &r);
      for (uint32_t w2 = 0; w2 < r.warning_count; ++w2) {
        std::fprintf(stderr, "warning (case %zu): %s\n", i, yp_results_warning(results, i, w2));
      }
    }
    if (!all_equivalent(results)) {
      std::fprintf(stderr, "error: some cases did not match the sequential reference\n");
      code = kExitFailure;
    }
  }
  yp_results_destroy(results);
  return code;
}

int run_report(const Options& o) {
  if (o.input.empty()) throw UsageError{"report requires --input CSV"};
  yp_results* results = nullptr;
  if (auto s = yp_results_read_csv(o.input.c_str(), &results); s != YP_OK) {
    return report_status(s, "reading CSV");
  }
  yp_trend_summary summary{};
  char* text = nullptr;
  const uint32_t cores = o.cores ? o.cores : yp_detect_core_count();
  const yp_status s = yp_trend_report(results, cores, &summary, &text);
  yp_results_destroy(results);
  if (s != YP_OK) return report_status(s, "trend report");
  std::fputs(text, stdout);
  yp_string_free(text);
  return o.strict && summary.any_failed ? kExitFailure : 0;
}

int run_verify(const Options& o) {
  yp_verify_options v;
  yp_verify_options_init(&v);
  v.input_path = o.input.empty() ? nullptr : o.input.c_str();
  v.seed = o.seed;
  v.anchors = o.anchors;
  v.classes = o.classes;
  v.prob_threshold = o.prob_threshold;
  v.nms_threshold = o.nms_threshold;
  v.property_trials = o.trials;
  int passed = 0;
  char* text = nullptr;
  if (auto s = yp_verify(&v, &passed, &text); s != YP_OK) return report_status(s, "verify");
  std::fputs(text, stdout);
  yp_string_free(text);
  return passed ? 0 : kExitFailure;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--prob-threshold", o.prob_threshold, "Confidence threshold (default 0.25)")
      ->check(CLI::Range(0.0f, 1.0f));
  cmd->add_option("--nms-threshold", o.nms_threshold, "IoU cutoff for NMS (default 0.45)")
      ->check(CLI::Range(0.0f, 1.0f));
  cmd->add_option("--seed", o.seed, "Synthetic input seed (default 42)");
  cmd->add_option("--anchors", o.anchors, "Synthetic input anchors (default 8400)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--classes", o.classes, "Synthetic input classes (default 80)")
      ->check(CLI::PositiveNumber);
}

void add_case_axes(CLI::App* cmd, Options& o, bool lists) {
  auto* threads = cmd->add_option("--threads", o.threads, "Thread count(s)")
                      ->check(CLI::Range(1u, 4096u));
  auto* schedule = cmd->add_option("--schedule", o.schedules, "static|dynamic")
                       ->check(CLI::IsMember({"static", "dynamic"}));
  auto* chunk = cmd->add_option("--chunk", o.chunks, "Chunk size N or 'auto'");
  auto* affinity = cmd->add_option("--affinity", o.affinities, "none|spread|close|master")
                       ->check(CLI::IsMember({"none", "spread", "close", "master"}));
  auto* background = cmd->add_option("--background", o.background, "Background load threads");
  for (auto* opt : {threads, schedule, chunk, affinity, background}) {
    if (lists) {
      opt->delimiter(',');
    } else {
      opt->expected(1);
    }
  }
  cmd->add_option("--warmup", o.warmup, "Untimed warmup iterations (>= 1)")
      ->check(CLI::Range(1u, 1000000u));
  cmd->add_option("--iters", o.iters, "Timed iterations (>= 5)")->check(CLI::Range(5u, 1000000u));
}

std::string csv_help() {
  return std::string("CSV columns, in order:\n  ") + yp_csv_columns() +
         "\nLatencies are microseconds with three fractional digits.";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel YOLO post-processing runtime and benchmark harness", "yolopar-bench"};
  app.require_subcommand(1);
  app.footer(csv_help());
  Options o;

  auto* verify = app.add_subcommand("verify", "Check parallel/sequential equivalence and runtime properties");
  add_common(verify, o);
  verify->add_option("--input", o.input, "FMAP file instead of synthetic input");
  verify->add_option("--trials", o.trials, "Random trials per property (default 50)")
      ->check(CLI::Range(1u, 100000u));

  auto* bench = app.add_subcommand("bench", "Measure a single configuration");
  add_common(bench, o);
  add_case_axes(bench, o, false);
  bench->add_option("--input", o.input, "FMAP file instead of synthetic input");
  bench->add_option("--out", o.out, "Also write the result as CSV");

  auto* sweep = app.add_subcommand(
      "sweep", "Measure a configuration grid and write CSV (comma lists; no axes = full default grid)");
  add_common(sweep, o);
  add_case_axes(sweep, o, true);
  sweep->add_option("--input", o.input, "FMAP file instead of synthetic input");
  sweep->add_option("--out", o.out, "CSV output path")->required();
  sweep->add_option("--cores", o.cores, "Background load for the contention cases (default: detected cores)");
  sweep->footer(csv_help());

  auto* report = app.add_subcommand("report", "Evaluate trend gates over a sweep CSV");
  report->add_option("--input", o.input, "Sweep CSV")->required();
  report->add_option("--cores", o.cores, "Cores of the measuring host (default: detected)");
  report->add_flag("--strict", o.strict, "Exit 1 when any gate fails");

  auto* gen = app.add_subcommand("gen", "Write a synthetic FMAP file");
  add_common(gen, o);
  gen->add_option("--out", o.out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    std::cerr << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  try {
    if (*verify) return run_verify(o);
    if (*bench) return run_bench(o);
    if (*sweep) return run_sweep(o);
    if (*report) return run_report(o);
    if (*gen) return run_gen(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.message << "\n\n" << app.help();
    return kExitUsage;
  }
  return kExitUsage;
}
