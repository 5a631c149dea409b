// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/bench.hpp>

namespace yolopar {
namespace {

const std::vector<std::size_t> kSweepThreads{1, 2, 4, 8, 16, 32};

}  // namespace

std::vector<BenchCase> expand(const SweepGrid& grid, const BenchCase& base) {
  std::vector<BenchCase> cases;
  for (auto threads : grid.threads) {
    for (auto policy : grid.policies) {
      for (const auto& chunk : grid.chunks) {
        for (auto affinity : grid.affinities) {
          for (auto background : grid.background) {
            BenchCase c = base;
            c.threads = threads;
            c.schedule = ScheduleSpec{policy, chunk};
            c.affinity = affinity;
            c.background_threads = background;
            cases.push_back(std::move(c));
          }
        }
      }
    }
  }
  return cases;
}

SweepGrid replica_grid() {
  SweepGrid grid;
  grid.threads = kSweepThreads;
  grid.policies = {SchedulePolicy::Static, SchedulePolicy::Dynamic};
  grid.chunks = {1, 8, 32, 124, 512, 2048, 8400};
  return grid;
}

SweepGrid affinity_grid() {
  SweepGrid grid;
  grid.threads = kSweepThreads;
  grid.policies = {SchedulePolicy::Static};
  grid.chunks = {124};
  grid.affinities = {AffinityPolicy::None, AffinityPolicy::Spread, AffinityPolicy::Close,
                     AffinityPolicy::Master};
  return grid;
}

SweepGrid contention_grid(std::size_t cores) {
  SweepGrid grid;
  grid.threads = {4};
  grid.policies = {SchedulePolicy::Dynamic};
  grid.chunks = {124};
  grid.background = {0, cores};
  return grid;
}

std::vector<BenchCase> default_sweep_cases(const BenchCase& base, std::size_t cores) {
  auto cases = expand(replica_grid(), base);
  for (auto& c : expand(affinity_grid(), base)) cases.push_back(std::move(c));
  for (auto& c : expand(contention_grid(cores), base)) cases.push_back(std::move(c));
  return cases;
}

std::vector<BenchResult> sweep(std::span<const BenchCase> cases, const SweepProgress& progress) {
  std::vector<BenchResult> results;
  results.reserve(cases.size());
  for (const auto& c : cases) {
    const std::size_t workers_before = live_worker_threads();
    const std::size_t load_before = live_load_threads();

    BenchResult r;
    try {
      r = run_case(c);
    } catch (const std::exception& e) {
      r = BenchResult{};
      r.bench_case = c;
      r.equivalent = false;
      r.warnings.push_back(std::string("case failed: ") + e.what());
    }

    if (live_worker_threads() != workers_before || live_load_threads() != load_before) {
      r.warnings.push_back("threads leaked past the end of the case");
    }
    results.push_back(std::move(r));
    if (progress) progress(results.size(), cases.size(), results.back());
  }
  return results;
}

std::vector<BenchResult> sweep(const SweepGrid& grid, const BenchCase& base,
                               const SweepProgress& progress) {
  const auto cases = expand(grid, base);
  return sweep(cases, progress);
}

}  // namespace yolopar
