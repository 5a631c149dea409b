// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/bench.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace yolopar {
namespace {

template <class Int>
std::optional<Int> parse_int(std::string_view text) {
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

double to_us(std::chrono::nanoseconds ns) { return static_cast<double>(ns.count()) / 1000.0; }

}  // namespace

std::string describe(const InputSource& input) {
  if (const auto* synth = std::get_if<SynthSpec>(&input)) {
    return "synth:seed=" + std::to_string(synth->seed) +
           ":anchors=" + std::to_string(synth->num_anchors) +
           ":classes=" + std::to_string(synth->num_class);
  }
  return "file:" + std::get<std::filesystem::path>(input).string();
}

std::optional<InputSource> parse_input_source(std::string_view text) {
  if (text.starts_with("file:")) {
    text.remove_prefix(5);
    if (text.empty()) return std::nullopt;
    return InputSource{std::filesystem::path(std::string(text))};
  }
  if (!text.starts_with("synth:")) return std::nullopt;
  text.remove_prefix(6);

  SynthSpec spec;
  int seen = 0;
  while (!text.empty()) {
    const auto colon = text.find(':');
    const auto part = text.substr(0, colon);
    text = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) return std::nullopt;
    const auto key = part.substr(0, eq);
    const auto value = part.substr(eq + 1);
    if (key == "seed") {
      auto v = parse_int<std::uint64_t>(value);
      if (!v) return std::nullopt;
      spec.seed = *v;
      seen |= 1;
    } else if (key == "anchors") {
      auto v = parse_int<std::size_t>(value);
      if (!v) return std::nullopt;
      spec.num_anchors = *v;
      seen |= 2;
    } else if (key == "classes") {
      auto v = parse_int<std::size_t>(value);
      if (!v) return std::nullopt;
      spec.num_class = *v;
      seen |= 4;
    } else {
      return std::nullopt;
    }
  }
  if (seen != 7) return std::nullopt;
  return InputSource{spec};
}

void validate(const BenchCase& c) {
  if (c.threads == 0) throw std::invalid_argument("threads must be >= 1");
  if (c.warmup_iters < 1) throw std::invalid_argument("warmup_iters must be >= 1");
  if (c.measure_iters < 5) throw std::invalid_argument("measure_iters must be >= 5");
  if (c.schedule.chunk && *c.schedule.chunk == 0) {
    throw std::invalid_argument("chunk must be >= 1");
  }
  DetectParams params;
  params.prob_threshold = c.prob_threshold;
  params.nms_threshold = c.nms_threshold;
  validate(params);
}

LatencyStats compute_stats(std::span<const double> samples_us) {
  LatencyStats stats;
  stats.samples = samples_us.size();
  if (samples_us.empty()) return stats;

  std::vector<double> sorted(samples_us.begin(), samples_us.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  stats.min_us = sorted.front();
  stats.max_us = sorted.back();
  stats.mean_us = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  stats.median_us = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  stats.p95_us = sorted[std::max<std::size_t>(rank, 1) - 1];
  return stats;
}

FeatureMap load_input(const InputSource& input) {
  if (const auto* synth = std::get_if<SynthSpec>(&input)) return synth_feature_map(*synth);
  return read_feature_map(std::get<std::filesystem::path>(input));
}

DetectParams detect_params_for(const FeatureMap& feat, float prob_threshold, float nms_threshold) {
  DetectParams params;
  params.prob_threshold = prob_threshold;
  params.nms_threshold = nms_threshold;
  const auto size = target_size_for_anchors(feat.num_anchors(), params.strides);
  if (!size) {
    throw std::invalid_argument(std::to_string(feat.num_anchors()) +
                                " anchors do not form a square grid over strides 8/16/32");
  }
  params.target_size = *size;
  validate(params);
  return params;
}

BenchResult run_case(const BenchCase& bench_case) {
  return run_case(bench_case, [&] { return load_input(bench_case.input); });
}

BenchResult run_case(const BenchCase& bench_case, const InputProvider& provider) {
  validate(bench_case);
  BenchResult result;
  result.bench_case = bench_case;

  const FeatureMap feat = provider();
  const DetectParams params =
      detect_params_for(feat, bench_case.prob_threshold, bench_case.nms_threshold);

  BackgroundLoad load = BackgroundLoad::start(bench_case.background_threads);
  WorkerPool pool(RuntimeConfig{bench_case.threads, bench_case.affinity, 0});
  if (!pool.warning().empty()) result.warnings.push_back(pool.warning());
  const Executor executor = ParallelExecutor{&pool, bench_case.schedule};

  std::optional<std::size_t> count;
  bool count_stable = true;
  auto note_count = [&](std::size_t c) {
    if (count && *count != c) count_stable = false;
    count = c;
  };

  for (std::size_t i = 0; i < bench_case.warmup_iters; ++i) {
    note_count(postprocess(feat, params, executor).proposal_count);
  }

  std::vector<double> gen_us, total_us;
  gen_us.reserve(bench_case.measure_iters);
  total_us.reserve(bench_case.measure_iters);
  PostprocessResult last;
  for (std::size_t i = 0; i < bench_case.measure_iters; ++i) {
    last = postprocess(feat, params, executor);
    gen_us.push_back(to_us(last.timings.proposal_generation));
    total_us.push_back(to_us(last.timings.total));
    note_count(last.proposal_count);
  }
  result.proposal_gen = compute_stats(gen_us);
  result.total = compute_stats(total_us);
  result.proposal_count = count.value_or(0);

  // Oracle comparison, outside every timed region but still under load.
  const auto grid = generate_grid_strides(params.target_size, params.strides);
  const auto reference = sort_proposals(generate_proposals_seq(grid, feat, params.prob_threshold));
  const auto parallel = sort_proposals(
      generate_proposals_par(pool, bench_case.schedule, grid, feat, params.prob_threshold));
  const auto reference_final = postprocess(feat, params, SequentialExecutor{});

  result.equivalent = count_stable && bitwise_equal(reference, parallel) &&
                      reference.size() == result.proposal_count &&
                      bitwise_equal(reference_final.detections, last.detections);
  if (!count_stable) result.warnings.push_back("proposal count changed between iterations");
  if (!result.equivalent) result.warnings.push_back("parallel output differs from the sequential reference");

  load.stop();
  return result;
}

}  // namespace yolopar
