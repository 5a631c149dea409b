// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/bench.hpp>

#include <algorithm>
#include <atomic>
#include <memory>
#include <thread>

namespace yolopar {
namespace {

std::size_t uniform(SplitMix64& rng, std::size_t lo, std::size_t hi) {  // [lo, hi]
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

struct Tally {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::string first_failure;

  void record(bool ok, const std::string& what) {
    ++runs;
    if (!ok && failures++ == 0) first_failure = what;
  }
  VerifyCheck to_check(std::string name) const {
    std::string detail = std::to_string(runs - failures) + "/" + std::to_string(runs) + " passed";
    if (failures) detail += "; first failure: " + first_failure;
    return {std::move(name), failures == 0 && runs > 0, std::move(detail)};
  }
};

std::string config_name(std::size_t threads, const ScheduleSpec& s, AffinityPolicy a) {
  return "threads=" + std::to_string(threads) + " " + to_string(s.policy) + " chunk=" +
         (s.chunk ? std::to_string(*s.chunk) : std::string("auto")) + " affinity=" + to_string(a);
}

VerifyCheck check_equivalence_grid(const VerifyOptions& options, const FeatureMap& feat,
                                   std::span<const GridStride> grid,
                                   const std::vector<Proposal>& reference_sorted) {
  Tally tally;
  auto run = [&](std::size_t threads, const ScheduleSpec& schedule, AffinityPolicy affinity) {
    WorkerPool pool(RuntimeConfig{threads, affinity, 0});
    const auto got = sort_proposals(
        generate_proposals_par(pool, schedule, grid, feat, options.prob_threshold));
    tally.record(bitwise_equal(got, reference_sorted), config_name(threads, schedule, affinity));
  };
  for (auto threads : options.threads) {
    for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
      for (auto chunk : options.chunks) run(threads, {policy, chunk}, AffinityPolicy::None);
    }
    for (auto affinity : {AffinityPolicy::Spread, AffinityPolicy::Close, AffinityPolicy::Master}) {
      run(threads, {SchedulePolicy::Static, 124}, affinity);
    }
  }
  return tally.to_check("parallel/sequential equivalence");
}

VerifyCheck check_single_thread(const VerifyOptions& options, const FeatureMap& feat,
                                std::span<const GridStride> grid,
                                const std::vector<Proposal>& reference) {
  Tally tally;
  WorkerPool pool(RuntimeConfig{1, AffinityPolicy::None, 0});
  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    for (auto chunk : options.chunks) {
      const ScheduleSpec schedule{policy, chunk};
      const auto got = generate_proposals_par(pool, schedule, grid, feat, options.prob_threshold);
      tally.record(bitwise_equal(got, reference),
                   config_name(1, schedule, AffinityPolicy::None));
    }
  }
  return tally.to_check("single-thread order equivalence");
}

VerifyCheck check_emission(const VerifyOptions& options, const FeatureMap& feat,
                           const std::vector<Proposal>& reference) {
  std::size_t expected = 0;
  for (std::size_t i = 0; i < feat.num_anchors(); ++i) {
    const auto row = feat.row(i);
    for (std::size_t j = kBoxFields; j < row.size(); ++j) {
      if (row[4] * row[j] > options.prob_threshold) ++expected;
    }
  }
  const bool all_above = std::all_of(reference.begin(), reference.end(), [&](const Proposal& p) {
    return p.prob > options.prob_threshold;
  });
  const bool ok = all_above && expected == reference.size();
  return {"emission count", ok,
          std::to_string(reference.size()) + " proposals, scalar scan counts " +
              std::to_string(expected)};
}

VerifyCheck check_postprocess(const VerifyOptions& options, const FeatureMap& feat) {
  const auto params = detect_params_for(feat, options.prob_threshold, options.nms_threshold);
  const auto seq = postprocess(feat, params, SequentialExecutor{});

  Tally tally;
  WorkerPool pool(RuntimeConfig{4, AffinityPolicy::None, 0});
  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    const ScheduleSpec schedule{policy, 124};
    const auto par = postprocess(feat, params, ParallelExecutor{&pool, schedule});
    tally.record(bitwise_equal(seq.detections, par.detections) &&
                     seq.proposal_count == par.proposal_count,
                 config_name(4, schedule, AffinityPolicy::None));
  }
  {
    // Same check with every core busy with background load.
    BackgroundLoad load = BackgroundLoad::start(detect_core_count());
    const ScheduleSpec schedule{SchedulePolicy::Dynamic, 124};
    const auto par = postprocess(feat, params, ParallelExecutor{&pool, schedule});
    tally.record(bitwise_equal(seq.detections, par.detections),
                 config_name(4, schedule, AffinityPolicy::None) + " under load");
  }
  auto check = tally.to_check("postprocess equivalence");
  check.detail += " (" + std::to_string(seq.detections.size()) + " detections)";
  return check;
}

VerifyCheck check_coverage(const VerifyOptions& options, SplitMix64& rng) {
  Tally tally;
  for (std::size_t trial = 0; trial < options.property_trials; ++trial) {
    const std::size_t n = uniform(rng, 0, 20000);
    const std::size_t threads = uniform(rng, 1, 32);
    const auto policy = rng() % 2 ? SchedulePolicy::Dynamic : SchedulePolicy::Static;
    const std::size_t chunk = uniform(rng, 1, std::max<std::size_t>(n, 1));

    auto hits = std::make_unique<std::atomic<int>[]>(n);
    WorkerPool pool(RuntimeConfig{threads, AffinityPolicy::None, 0});
    auto [items, stats] = parallel_for_collect<std::size_t>(
        pool, n, {policy, chunk}, [&](std::size_t i, std::vector<std::size_t>&) {
          hits[i].fetch_add(1, std::memory_order_relaxed);
        });
    bool ok = items.empty() && stats.trip_count == n;
    std::size_t covered = 0;
    for (auto c : stats.indices_covered_per_thread) covered += c;
    ok = ok && covered == n;
    for (std::size_t i = 0; ok && i < n; ++i) ok = hits[i].load() == 1;
    tally.record(ok, "n=" + std::to_string(n) + " " +
                         config_name(threads, {policy, chunk}, AffinityPolicy::None));
  }
  return tally.to_check("loop coverage");
}

VerifyCheck check_static_partition(const VerifyOptions& options, SplitMix64& rng) {
  Tally tally;
  for (std::size_t trial = 0; trial < options.property_trials * 4; ++trial) {
    const std::size_t n = uniform(rng, 0, 100000);
    const std::size_t threads = uniform(rng, 1, 32);
    const std::size_t chunk = uniform(rng, 1, std::max<std::size_t>(n, 1));
    const auto a = partition_static(n, threads, chunk);
    const auto b = partition_static(n, threads, chunk);

    std::vector<IndexRange> all;
    std::size_t lo_count = n, hi_count = 0;
    for (const auto& assignment : a) {
      all.insert(all.end(), assignment.ranges.begin(), assignment.ranges.end());
      lo_count = std::min(lo_count, assignment.index_count());
      hi_count = std::max(hi_count, assignment.index_count());
    }
    std::sort(all.begin(), all.end(),
              [](const IndexRange& x, const IndexRange& y) { return x.lo < y.lo; });
    bool cover = true;
    std::size_t next = 0;
    for (const auto& r : all) {
      cover = cover && r.lo == next && r.lo < r.hi;
      next = r.hi;
    }
    cover = cover && next == n;
    const bool balanced = n == 0 || hi_count - lo_count <= chunk;
    tally.record(a == b && cover && balanced, "n=" + std::to_string(n) + " threads=" +
                                                  std::to_string(threads) + " chunk=" +
                                                  std::to_string(chunk));
  }
  return tally.to_check("static partition properties");
}

VerifyCheck check_dynamic_claims(const VerifyOptions& options, SplitMix64& rng) {
  Tally tally;
  for (std::size_t trial = 0; trial < options.property_trials; ++trial) {
    const std::size_t n = uniform(rng, 0, 50000);
    const std::size_t chunk = uniform(rng, 1, 64);
    const std::size_t claimants = uniform(rng, 2, 8);
    ChunkCursor cursor;
    auto hits = std::make_unique<std::atomic<int>[]>(n);
    std::atomic<std::size_t> total{0};
    {
      std::vector<std::jthread> threads;
      for (std::size_t t = 0; t < claimants; ++t) {
        threads.emplace_back([&] {
          while (auto r = claim_next_chunk(cursor, chunk, n)) {
            total.fetch_add(r->size());
            for (std::size_t i = r->lo; i < r->hi; ++i) hits[i].fetch_add(1);
          }
        });
      }
    }
    bool ok = total.load() == n;
    for (std::size_t i = 0; ok && i < n; ++i) ok = hits[i].load() == 1;
    tally.record(ok, "n=" + std::to_string(n) + " chunk=" + std::to_string(chunk));
  }
  return tally.to_check("dynamic claim conservation");
}

VerifyCheck check_nms_monotone(const std::vector<Proposal>& reference_sorted) {
  const std::size_t n = std::min<std::size_t>(reference_sorted.size(), 2000);
  const std::span<const Proposal> head(reference_sorted.data(), n);
  Tally tally;
  std::size_t previous = 0;
  for (float threshold : {0.05f, 0.15f, 0.3f, 0.45f, 0.6f, 0.75f, 0.9f, 1.0f}) {
    const std::size_t kept = nms(head, threshold).size();
    tally.record(kept >= previous, "threshold " + std::to_string(threshold));
    previous = kept;
  }
  return tally.to_check("nms threshold monotonicity");
}

}  // namespace

bool VerifyReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

std::string VerifyReport::text() const {
  std::string out;
  for (const auto& c : checks) {
    out += c.passed ? "[PASS] " : "[FAIL] ";
    out += c.name + ": " + c.detail + "\n";
  }
  return out;
}

VerifyReport verify_suite(const VerifyOptions& options) {
  const FeatureMap feat = load_input(options.input);
  const auto params = detect_params_for(feat, options.prob_threshold, options.nms_threshold);
  const auto grid = generate_grid_strides(params.target_size, params.strides);
  const auto reference = generate_proposals_seq(grid, feat, options.prob_threshold);
  const auto reference_sorted = sort_proposals(reference);
  SplitMix64 rng(options.seed);

  VerifyReport report;
  report.checks.push_back(check_equivalence_grid(options, feat, grid, reference_sorted));
  report.checks.push_back(check_single_thread(options, feat, grid, reference));
  report.checks.push_back(check_emission(options, feat, reference));
  report.checks.push_back(check_postprocess(options, feat));
  report.checks.push_back(check_coverage(options, rng));
  report.checks.push_back(check_static_partition(options, rng));
  report.checks.push_back(check_dynamic_claims(options, rng));
  report.checks.push_back(check_nms_monotone(reference_sorted));
  return report;
}

}  // namespace yolopar
