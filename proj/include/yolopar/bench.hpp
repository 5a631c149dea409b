// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

// Benchmark harness: single-case measurement, configuration sweeps, CSV
// interchange, directional trend gates and the correctness verification
// suite.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <yolopar/detection.hpp>
#include <yolopar/runtime.hpp>
#include <yolopar/workload.hpp>

namespace yolopar {

using InputSource = std::variant<SynthSpec, std::filesystem::path>;

/// "synth:seed=S:anchors=A:classes=C" or "file:PATH".
std::string describe(const InputSource& input);
std::optional<InputSource> parse_input_source(std::string_view text);

struct BenchCase {
  std::size_t threads = 1;
  ScheduleSpec schedule;
  AffinityPolicy affinity = AffinityPolicy::None;
  float prob_threshold = 0.25f;
  float nms_threshold = 0.45f;
  std::size_t background_threads = 0;
  InputSource input = SynthSpec{};
  std::size_t warmup_iters = 1;
  std::size_t measure_iters = 5;
};

/// Throws std::invalid_argument (threads >= 1, warmup >= 1, measure >= 5,
/// explicit chunk >= 1, thresholds in range).
void validate(const BenchCase& bench_case);

struct LatencyStats {
  double min_us = 0;
  double median_us = 0;
  double mean_us = 0;
  double p95_us = 0;  // nearest rank
  double max_us = 0;
  std::size_t samples = 0;
};

LatencyStats compute_stats(std::span<const double> samples_us);

struct BenchResult {
  BenchCase bench_case;
  LatencyStats proposal_gen;
  LatencyStats total;  // post-processing end to end (grid, proposals, sort, NMS)
  std::size_t proposal_count = 0;
  bool equivalent = false;
  std::vector<std::string> warnings;
};

using InputProvider = std::function<FeatureMap()>;

/// Builds the input, starts background load, creates the pool, runs the
/// untimed warmup and timed iterations, then checks the parallel output
/// against the sequential reference. Only the postprocess call is timed.
BenchResult run_case(const BenchCase& bench_case);
/// Same, with input construction delegated to `provider`.
BenchResult run_case(const BenchCase& bench_case, const InputProvider& provider);

/// Builds the feature map named by an input source and the detection
/// parameters matching its anchor count.
FeatureMap load_input(const InputSource& input);
DetectParams detect_params_for(const FeatureMap& feat, float prob_threshold, float nms_threshold);

struct SweepGrid {
  std::vector<std::size_t> threads;
  std::vector<SchedulePolicy> policies;
  std::vector<std::optional<std::size_t>> chunks;
  std::vector<AffinityPolicy> affinities{AffinityPolicy::None};
  std::vector<std::size_t> background{0};
};

/// Cartesian product in threads, policy, chunk, affinity, background order.
std::vector<BenchCase> expand(const SweepGrid& grid, const BenchCase& base);

/// threads {1,2,4,8,16,32} x {static, dynamic} x chunks {1,8,32,124,512,2048,8400}.
SweepGrid replica_grid();
/// threads {1,2,4,8,16,32} x static x chunk 124 x every affinity policy.
SweepGrid affinity_grid();
/// threads 4, dynamic, chunk 124, background {0, cores}.
SweepGrid contention_grid(std::size_t cores);
/// Replica, affinity and contention grids, in that order.
std::vector<BenchCase> default_sweep_cases(const BenchCase& base, std::size_t cores);

using SweepProgress = std::function<void(std::size_t done, std::size_t total, const BenchResult&)>;

/// Runs cases one at a time in the given order. A failing case yields a
/// result with equivalent = false and a warning; the sweep continues.
std::vector<BenchResult> sweep(std::span<const BenchCase> cases, const SweepProgress& progress = {});
std::vector<BenchResult> sweep(const SweepGrid& grid, const BenchCase& base,
                               const SweepProgress& progress = {});

/// Fixed CSV column order.
std::span<const std::string_view> csv_columns() noexcept;
std::string to_csv(std::span<const BenchResult> results);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(std::span<const BenchResult> results, const std::filesystem::path& path);
/// Throws std::runtime_error with the offending line on malformed input.
std::vector<BenchResult> parse_csv(std::string_view text);
std::vector<BenchResult> read_csv(const std::filesystem::path& path);

enum class GateStatus { Pass, Fail, Skipped };
const char* to_string(GateStatus status) noexcept;

inline constexpr double kSpeedupGate = 1.2;
inline constexpr double kContentionGate = 1.5;
inline constexpr std::size_t kSpeedupGateMinCores = 4;

struct GateResult {
  std::string name;
  GateStatus status = GateStatus::Skipped;
  std::string detail;
};

struct TrendOptions {
  /// Cores of the host that produced the results; 0 = unknown. The speedup
  /// gate is skipped on hosts with fewer than kSpeedupGateMinCores.
  std::size_t host_cores = 0;
};

struct TrendReport {
  std::vector<GateResult> gates;  // speedup, concavity, oversubscription, contention
  std::string text;

  bool any_failed() const noexcept;
  int exit_status(bool strict) const noexcept { return strict && any_failed() ? 1 : 0; }
};

TrendReport trend_report(std::span<const BenchResult> results, const TrendOptions& options = {});

struct VerifyOptions {
  InputSource input = SynthSpec{};
  float prob_threshold = 0.25f;
  float nms_threshold = 0.45f;
  std::vector<std::size_t> threads{1, 2, 4, 8, 16, 32};
  std::vector<std::size_t> chunks{1, 8, 32, 124, 512, 2048, 8400};
  std::size_t property_trials = 50;
  std::uint64_t seed = 1;
};

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool passed() const noexcept;
  std::string text() const;
};

/// Equivalence over the configuration grid plus the runtime and detection
/// property checks. No timing.
VerifyReport verify_suite(const VerifyOptions& options);

}  // namespace yolopar
