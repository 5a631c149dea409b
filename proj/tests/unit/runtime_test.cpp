// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include <yolopar/runtime.hpp>

#include "../support/oracles.hpp"

using namespace yolopar;

namespace {

std::vector<std::size_t> cores_of(const std::vector<CoreAssignment>& v) {
  std::vector<std::size_t> out;
  for (const auto& c : v) out.push_back(c.value());
  return out;
}

ScheduleSpec sched(SchedulePolicy p, std::optional<std::size_t> chunk = std::nullopt) {
  return {p, chunk};
}

}  // namespace

TEST_CASE("policy names round-trip") {
  for (auto p : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    CHECK(parse_schedule_policy(to_string(p)) == p);
  }
  for (auto a : {AffinityPolicy::None, AffinityPolicy::Spread, AffinityPolicy::Close,
                 AffinityPolicy::Master}) {
    CHECK(parse_affinity_policy(to_string(a)) == a);
  }
  CHECK_FALSE(parse_schedule_policy("guided"));
  CHECK_FALSE(parse_affinity_policy("compact"));
}

TEST_CASE("resolve_chunk") {
  CHECK(resolve_chunk(sched(SchedulePolicy::Static), 8400, 4) == 2100);
  CHECK(resolve_chunk(sched(SchedulePolicy::Static), 10, 3) == 4);
  CHECK(resolve_chunk(sched(SchedulePolicy::Dynamic), 8400, 4) == 1);
  CHECK(resolve_chunk(sched(SchedulePolicy::Dynamic, 124), 8400, 4) == 124);
  CHECK(resolve_chunk(sched(SchedulePolicy::Static), 0, 4) >= 1);
  CHECK_THROWS_AS(resolve_chunk(sched(SchedulePolicy::Static, 0), 10, 2), std::invalid_argument);
}

TEST_CASE("apply_affinity examples") {
  CHECK(cores_of(apply_affinity(AffinityPolicy::Master, 4, 4)) == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(cores_of(apply_affinity(AffinityPolicy::Close, 4, 4)) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(cores_of(apply_affinity(AffinityPolicy::Spread, 2, 4)) == std::vector<std::size_t>{0, 2});
  CHECK(cores_of(apply_affinity(AffinityPolicy::Close, 6, 4)) ==
        std::vector<std::size_t>{0, 1, 2, 3, 0, 1});
  const auto none = apply_affinity(AffinityPolicy::None, 5, 4);
  CHECK(none.size() == 5);
  CHECK(std::none_of(none.begin(), none.end(), [](const auto& c) { return c.has_value(); }));
}

TEST_CASE("apply_affinity stays within the core range") {
  for (std::size_t t = 1; t <= 40; ++t) {
    for (std::size_t c = 1; c <= 12; ++c) {
      for (auto p : {AffinityPolicy::Spread, AffinityPolicy::Close, AffinityPolicy::Master}) {
        const auto v = apply_affinity(p, t, c);
        REQUIRE(v.size() == t);
        for (const auto& core : v) CHECK(core.value() < c);
      }
      // spread is non-decreasing and, with enough cores, one thread per core
      const auto s = cores_of(apply_affinity(AffinityPolicy::Spread, t, c));
      CHECK(std::is_sorted(s.begin(), s.end()));
      if (t <= c) CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == t);
    }
  }
}

TEST_CASE("partition_static examples") {
  SUBCASE("even split") {
    const auto p = partition_static(10, 2, 5);
    REQUIRE(p.size() == 2);
    CHECK(p[0].ranges == std::vector<IndexRange>{{0, 5}});
    CHECK(p[1].ranges == std::vector<IndexRange>{{5, 10}});
  }
  SUBCASE("more threads than chunks") {
    const auto p = partition_static(5, 8, 1);
    REQUIRE(p.size() == 8);
    for (std::size_t t = 0; t < 5; ++t) CHECK(p[t].ranges == std::vector<IndexRange>{{t, t + 1}});
    for (std::size_t t = 5; t < 8; ++t) CHECK(p[t].ranges.empty());
  }
  SUBCASE("8400 anchors, 4 threads, chunk 124") {
    const auto p = partition_static(8400, 4, 124);
    std::size_t chunks = 0, full = 0, last_size = 0, last_lo = 0;
    for (const auto& a : p) {
      for (const auto& r : a.ranges) {
        ++chunks;
        full += r.size() == 124;
        if (r.lo >= last_lo) {
          last_lo = r.lo;
          last_size = r.size();
        }
      }
    }
    CHECK(chunks == 68);
    CHECK(full == 67);
    CHECK(last_size == 92);
    REQUIRE(p[0].ranges.size() == 17);
    CHECK(p[0].ranges[0] == IndexRange{0, 124});
    CHECK(p[0].ranges[1] == IndexRange{496, 620});
    CHECK(p[0].ranges.back() == IndexRange{64 * 124, 65 * 124});
    const auto expected = oracle::static_partition(8400, 4, 124);
    for (std::size_t t = 0; t < 4; ++t) CHECK(p[t].ranges == expected[t]);
  }
  SUBCASE("empty loop") {
    const auto p = partition_static(0, 3, 7);
    REQUIRE(p.size() == 3);
    for (const auto& a : p) CHECK(a.ranges.empty());
  }
}

TEST_CASE("partition_static properties over random triples") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 20000)(rng);
    const std::size_t t = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    const std::size_t c = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(n, 1))(rng);
    const auto p = partition_static(n, t, c);
    CHECK(p == partition_static(n, t, c));
    const auto expected = oracle::static_partition(n, t, c);
    std::vector<int> hits(n, 0);
    std::size_t lo = n, hi = 0;
    for (std::size_t id = 0; id < t; ++id) {
      CHECK(p[id].thread_id == id);
      CHECK(p[id].ranges == expected[id]);
      for (const auto& r : p[id].ranges) {
        for (std::size_t i = r.lo; i < r.hi; ++i) ++hits[i];
      }
      lo = std::min(lo, p[id].index_count());
      hi = std::max(hi, p[id].index_count());
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK(hi - lo <= c);
  }
}

TEST_CASE("claim_next_chunk single claimant") {
  ChunkCursor cursor;
  CHECK(claim_next_chunk(cursor, 4, 10) == IndexRange{0, 4});
  CHECK(claim_next_chunk(cursor, 4, 10) == IndexRange{4, 8});
  CHECK(claim_next_chunk(cursor, 4, 10) == IndexRange{8, 10});
  CHECK_FALSE(claim_next_chunk(cursor, 4, 10));
  CHECK_FALSE(claim_next_chunk(cursor, 4, 10));

  ChunkCursor empty;
  CHECK_FALSE(claim_next_chunk(empty, 3, 0));
}

TEST_CASE("claim_next_chunk concurrent claimants cover every index once") {
  for (std::size_t chunk : {1u, 7u, 124u}) {
    constexpr std::size_t n = 8400;
    ChunkCursor cursor;
    std::vector<std::atomic<int>> hits(n);
    std::atomic<std::size_t> total{0};
    std::vector<std::thread> claimants;
    for (int t = 0; t < 8; ++t) {
      claimants.emplace_back([&] {
        while (auto r = claim_next_chunk(cursor, chunk, n)) {
          total += r->size();
          for (std::size_t i = r->lo; i < r->hi; ++i) hits[i].fetch_add(1);
        }
      });
    }
    for (auto& th : claimants) th.join();
    CHECK(total == n);
    CHECK(std::all_of(hits.begin(), hits.end(), [](const auto& h) { return h.load() == 1; }));
  }
}

TEST_CASE("worker pool sizes") {
  const auto baseline = live_worker_threads();
  {
    WorkerPool one({1, AffinityPolicy::Master, 0});
    CHECK(one.worker_count() == 0);
    CHECK(one.num_threads() == 1);
    WorkerPool four({4, AffinityPolicy::None, 4});
    CHECK(four.worker_count() == 3);
    CHECK(four.core_assignments().size() == 4);
    WorkerPool many({32, AffinityPolicy::None, 4});
    CHECK(many.worker_count() == 31);
    CHECK(live_worker_threads() == baseline + 34);
  }
  CHECK(live_worker_threads() == baseline);
  CHECK_THROWS_AS(WorkerPool({0, AffinityPolicy::None, 0}), std::invalid_argument);
}

TEST_CASE("worker pool pins or reports why not") {
  for (auto policy : {AffinityPolicy::Spread, AffinityPolicy::Close, AffinityPolicy::Master}) {
    WorkerPool pool({3, policy, 0});
    CHECK(pool.requested_affinity() == policy);
    if (pool.effective_affinity() == AffinityPolicy::None) {
      CHECK_FALSE(pool.warning().empty());
    } else {
      CHECK(pool.effective_affinity() == policy);
      CHECK(pool.warning().empty());
      for (const auto& c : pool.core_assignments()) CHECK(c.has_value());
    }
  }
}

TEST_CASE("worker pool is reusable and runs each thread id once") {
  WorkerPool pool({5, AffinityPolicy::None, 0});
  const auto workers = live_worker_threads();
  for (int round = 0; round < 200; ++round) {
    std::vector<std::atomic<int>> seen(5);
    pool.run_on_all([&](std::size_t id) { seen[id].fetch_add(1); });
    for (auto& s : seen) REQUIRE(s.load() == 1);
  }
  CHECK(live_worker_threads() == workers);
}

TEST_CASE("parallel_for_collect examples") {
  WorkerPool pool({4, AffinityPolicy::None, 0});
  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    CAPTURE(to_string(policy));
    auto [all, s1] = parallel_for_collect<std::size_t>(
        pool, 100, sched(policy), [](std::size_t i, auto& out) { out.push_back(i); });
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(100);
    std::iota(expected.begin(), expected.end(), 0);
    CHECK(all == expected);

    auto [none, s2] = parallel_for_collect<int>(pool, 100, sched(policy), [](std::size_t, auto&) {});
    CHECK(none.empty());
    CHECK(s2.trip_count == 100);
  }

  auto [sevens, stats] = parallel_for_collect<std::size_t>(
      pool, 1000, sched(SchedulePolicy::Dynamic, 16), [](std::size_t i, auto& out) {
        if (i % 7 == 0) out.push_back(i);
      });
  std::vector<std::size_t> oracle_out;
  for (std::size_t i = 0; i < 1000; ++i) {
    if (i % 7 == 0) oracle_out.push_back(i);
  }
  std::sort(sevens.begin(), sevens.end());
  CHECK(sevens.size() == 143);
  CHECK(sevens == oracle_out);
  CHECK(std::accumulate(stats.items_emitted_per_thread.begin(), stats.items_emitted_per_thread.end(),
                        std::size_t{0}) == 143);
  CHECK(std::accumulate(stats.indices_covered_per_thread.begin(),
                        stats.indices_covered_per_thread.end(), std::size_t{0}) == 1000);
  CHECK(std::accumulate(stats.chunks_executed_per_thread.begin(),
                        stats.chunks_executed_per_thread.end(), std::size_t{0}) == 63);
}

TEST_CASE("parallel_for_collect static order is thread-major and repeatable") {
  WorkerPool pool({3, AffinityPolicy::None, 0});
  const auto body = [](std::size_t i, std::vector<std::size_t>& out) {
    if (i % 3 != 1) out.push_back(i * 2);
  };
  const auto [first, stats] = parallel_for_collect<std::size_t>(pool, 1000, sched(SchedulePolicy::Static, 10), body);
  std::vector<std::size_t> expected;
  for (const auto& ranges : oracle::static_partition(1000, 3, 10)) {
    for (const auto& r : ranges) {
      for (std::size_t i = r.lo; i < r.hi; ++i) body(i, expected);
    }
  }
  CHECK(first == expected);
  for (int run = 0; run < 20; ++run) {
    CHECK(parallel_for_collect<std::size_t>(pool, 1000, sched(SchedulePolicy::Static, 10), body).first ==
          first);
  }
}

TEST_CASE("parallel_for_collect with one thread matches a plain loop") {
  WorkerPool pool({1, AffinityPolicy::None, 0});
  const auto body = [](std::size_t i, std::vector<double>& out) {
    for (std::size_t k = 0; k < i % 4; ++k) out.push_back(static_cast<double>(i) / 3.0 + k);
  };
  std::vector<double> plain;
  for (std::size_t i = 0; i < 777; ++i) body(i, plain);
  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    const auto [items, stats] = parallel_for_collect<double>(pool, 777, sched(policy, 5), body);
    CHECK(items.size() == plain.size());
    CHECK(std::memcmp(items.data(), plain.data(), plain.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("parallel_for_collect dynamic output is a stable multiset") {
  WorkerPool pool({6, AffinityPolicy::None, 0});
  const auto run = [&] {
    auto items = parallel_for_collect<std::size_t>(pool, 5000, sched(SchedulePolicy::Dynamic, 3),
                                                   [](std::size_t i, auto& out) {
                                                     if (i % 5 < 2) out.push_back(i * i);
                                                   })
                     .first;
    std::sort(items.begin(), items.end());
    return items;
  };
  const auto reference = run();
  for (int i = 0; i < 10; ++i) CHECK(run() == reference);
}

TEST_CASE("loop body failure reports the failing index") {
  WorkerPool pool({4, AffinityPolicy::None, 0});
  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    std::atomic<std::size_t> calls{0};
    try {
      parallel_for_collect<int>(pool, 10000, sched(policy, 50), [&](std::size_t i, auto&) {
        ++calls;
        if (i == 777) throw std::domain_error("boom");
      });
      FAIL("expected LoopError");
    } catch (const LoopError& e) {
      CHECK(e.index() == 777);
      CHECK_THROWS_AS(std::rethrow_exception(e.cause()), std::domain_error);
    }
    CHECK(calls.load() <= 10000);

    // lowest of several failing indices that were reached
    try {
      parallel_for_collect<int>(pool, 400, sched(policy, 1), [](std::size_t i, auto&) {
        if (i >= 100) throw std::runtime_error("late");
      });
      FAIL("expected LoopError");
    } catch (const LoopError& e) {
      CHECK(e.index() >= 100);
    }

    // the pool stays usable afterwards
    const auto [items, stats] = parallel_for_collect<std::size_t>(
        pool, 64, sched(policy), [](std::size_t i, auto& out) { out.push_back(i); });
    CHECK(items.size() == 64);
  }

  WorkerPool single({1, AffinityPolicy::None, 0});
  try {
    parallel_for_collect<int>(single, 100, sched(SchedulePolicy::Static), [](std::size_t i, auto&) {
      if (i == 30 || i == 60) throw 1;
    });
    FAIL("expected LoopError");
  } catch (const LoopError& e) {
    CHECK(e.index() == 30);
  }
}

TEST_CASE("coverage property on random loops") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 30000)(rng);
    const std::size_t threads = std::uniform_int_distribution<std::size_t>(1, 32)(rng);
    const std::size_t chunk = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(n, 1))(rng);
    const auto policy = rng() % 2 ? SchedulePolicy::Static : SchedulePolicy::Dynamic;
    WorkerPool pool({threads, AffinityPolicy::None, 0});
    std::vector<std::atomic<int>> hits(n);
    const auto [items, stats] = parallel_for_collect<int>(
        pool, n, sched(policy, chunk), [&](std::size_t i, auto&) { hits[i].fetch_add(1); });
    CHECK(stats.trip_count == n);
    CHECK(std::all_of(hits.begin(), hits.end(), [](const auto& h) { return h.load() == 1; }));
  }
}
