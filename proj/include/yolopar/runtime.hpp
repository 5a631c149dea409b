// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

// Data-parallel loop runtime: a fork-join worker pool with OpenMP-style
// static/dynamic schedules, explicit chunk sizes and CPU affinity policies.
//
// The calling thread always participates as thread 0 ("master"); a pool of
// N threads therefore owns N - 1 worker threads. Workers park on a condition
// variable between loops.

#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iterator>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

namespace yolopar {

enum class SchedulePolicy { Static, Dynamic };

enum class AffinityPolicy { None, Spread, Close, Master };

const char* to_string(SchedulePolicy policy) noexcept;
const char* to_string(AffinityPolicy policy) noexcept;
std::optional<SchedulePolicy> parse_schedule_policy(std::string_view text) noexcept;
std::optional<AffinityPolicy> parse_affinity_policy(std::string_view text) noexcept;

/// Loop schedule. An empty chunk means "auto": ceil(n / threads) for
/// Static, 1 for Dynamic.
struct ScheduleSpec {
  SchedulePolicy policy = SchedulePolicy::Static;
  std::optional<std::size_t> chunk;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Resolves the chunk size for a loop of `n` iterations on `num_threads`.
/// Throws std::invalid_argument for an explicit chunk of 0.
std::size_t resolve_chunk(const ScheduleSpec& schedule, std::size_t n, std::size_t num_threads);

struct RuntimeConfig {
  std::size_t num_threads = 1;
  AffinityPolicy affinity = AffinityPolicy::None;
  /// 0 means "detect from the process CPU mask".
  std::size_t core_count = 0;
};

/// Number of CPUs the process may run on (at least 1).
std::size_t detect_core_count();

/// Half-open index interval [lo, hi).
struct IndexRange {
  std::size_t lo = 0;
  std::size_t hi = 0;

  std::size_t size() const noexcept { return hi - lo; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct ChunkAssignment {
  std::size_t thread_id = 0;
  std::vector<IndexRange> ranges;  // ascending, disjoint, non-empty

  std::size_t index_count() const noexcept;
  friend bool operator==(const ChunkAssignment&, const ChunkAssignment&) = default;
};

struct LoopStats {
  std::size_t trip_count = 0;
  std::vector<std::size_t> chunks_executed_per_thread;
  std::vector<std::size_t> indices_covered_per_thread;
  std::vector<std::size_t> items_emitted_per_thread;
  std::chrono::nanoseconds wall_time{0};
};

/// Logical core index for one thread; nullopt means unpinned.
using CoreAssignment = std::optional<std::size_t>;

/// Pure thread -> logical core mapping for an affinity policy.
///   Master: every thread on core 0.
///   Close:  thread t on core t mod core_count.
///   Spread: thread t on core floor(t * core_count / num_threads) mod core_count.
///   None:   all unpinned.
std::vector<CoreAssignment> apply_affinity(AffinityPolicy policy, std::size_t num_threads,
                                           std::size_t core_count);

/// Round-robin chunked static schedule: chunk k covers
/// [k * chunk, min((k + 1) * chunk, n)) and goes to thread k mod num_threads.
std::vector<ChunkAssignment> partition_static(std::size_t n, std::size_t num_threads,
                                              std::size_t chunk);

/// Shared monotone counter handing out dynamic-schedule chunks.
class ChunkCursor {
 public:
  ChunkCursor() = default;
  ChunkCursor(const ChunkCursor&) = delete;
  ChunkCursor& operator=(const ChunkCursor&) = delete;

  void reset() noexcept { next_.store(0, std::memory_order_relaxed); }

 private:
  friend std::optional<IndexRange> claim_next_chunk(ChunkCursor&, std::size_t, std::size_t) noexcept;
  std::atomic<std::size_t> next_{0};
};

/// Atomically claims [old, min(old + chunk, n)); nullopt once exhausted.
std::optional<IndexRange> claim_next_chunk(ChunkCursor& cursor, std::size_t chunk,
                                           std::size_t n) noexcept;

/// Raised by parallel_for_collect when the loop body fails. `index()` is the
/// smallest index whose body invocation threw; the original exception is
/// available through `cause()`.
class LoopError : public std::runtime_error {
 public:
  LoopError(std::size_t index, std::exception_ptr cause, const std::string& what);

  std::size_t index() const noexcept { return index_; }
  std::exception_ptr cause() const noexcept { return cause_; }

 private:
  std::size_t index_;
  std::exception_ptr cause_;
};

class WorkerPool {
 public:
  /// Throws std::invalid_argument if num_threads is 0. If pinning fails
  /// the pool is still created, with affinity downgraded to None and a
  /// warning recorded.
  explicit WorkerPool(const RuntimeConfig& config);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  std::size_t num_threads() const noexcept { return num_threads_; }
  std::size_t worker_count() const noexcept { return workers_.size(); }
  std::size_t core_count() const noexcept { return core_count_; }
  AffinityPolicy requested_affinity() const noexcept { return requested_affinity_; }
  AffinityPolicy effective_affinity() const noexcept { return effective_affinity_; }
  /// Per-thread logical cores actually applied (all nullopt when unpinned).
  const std::vector<CoreAssignment>& core_assignments() const noexcept { return cores_; }
  /// Empty unless something was downgraded.
  const std::string& warning() const noexcept { return warning_; }

  /// Runs task(thread_id) once on every thread id in [0, num_threads), the
  /// caller acting as thread 0, and returns when all have finished. The task
  /// must not throw.
  void run_on_all(const std::function<void(std::size_t)>& task);

 private:
  void worker_main(std::size_t thread_id);
  void pin_threads(const std::vector<std::size_t>& cpu_ids);

  std::size_t num_threads_;
  std::size_t core_count_;
  AffinityPolicy requested_affinity_;
  AffinityPolicy effective_affinity_;
  std::vector<CoreAssignment> cores_;
  std::string warning_;

  std::vector<std::thread> workers_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* task_ = nullptr;
  std::uint64_t generation_ = 0;
  std::size_t pending_ = 0;
  bool stopping_ = false;

  bool caller_pinned_ = false;
  std::vector<std::size_t> caller_original_cpus_;
};

/// Worker threads currently alive across all pools in the process.
std::size_t live_worker_threads() noexcept;

namespace detail {

/// Chunk callback: (thread_id, range). May throw LoopError.
using ChunkFn = std::function<void(std::size_t, IndexRange)>;

/// Drives one loop over [0, n) with the given schedule. Fills the chunk and
/// coverage counters and wall time of `stats`; rethrows the lowest-index
/// LoopError after in-flight chunks drain.
void run_chunks(WorkerPool& pool, std::size_t n, const ScheduleSpec& schedule, const ChunkFn& fn,
                LoopStats& stats);

}  // namespace detail

/// Invokes body(i, out) exactly once for every i in [0, n), where `out` is
/// the calling thread's private std::vector<T>. Buffers are concatenated in
/// thread-id order after the loop; with a Static schedule that order is
/// deterministic for a fixed configuration.
template <class T, class Body>
std::pair<std::vector<T>, LoopStats> parallel_for_collect(WorkerPool& pool, std::size_t n,
                                                          const ScheduleSpec& schedule,
                                                          Body&& body) {
  std::vector<std::vector<T>> local(pool.num_threads());
  LoopStats stats;

  detail::run_chunks(
      pool, n, schedule,
      [&](std::size_t thread_id, IndexRange range) {
        auto& out = local[thread_id];
        for (std::size_t i = range.lo; i < range.hi; ++i) {
          try {
            body(i, out);
          } catch (...) {
            throw LoopError(i, std::current_exception(),
                            "loop body failed at index " + std::to_string(i));
          }
        }
      },
      stats);

  std::size_t total = 0;
  stats.items_emitted_per_thread.resize(local.size());
  for (std::size_t t = 0; t < local.size(); ++t) {
    stats.items_emitted_per_thread[t] = local[t].size();
    total += local[t].size();
  }

  std::vector<T> items;
  items.reserve(total);
  for (auto& buffer : local) {
    std::move(buffer.begin(), buffer.end(), std::back_inserter(items));
  }
  return {std::move(items), std::move(stats)};
}

}  // namespace yolopar
