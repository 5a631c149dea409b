// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/runtime.hpp>

#include <algorithm>
#include <stdexcept>

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#define YOLOPAR_HAVE_PINNING 1
#else
#define YOLOPAR_HAVE_PINNING 0
#endif

namespace yolopar {
namespace {

std::atomic<std::size_t> g_live_workers{0};

#if YOLOPAR_HAVE_PINNING

std::vector<std::size_t> cpus_of(const cpu_set_t& set) {
  std::vector<std::size_t> cpus;
  for (int cpu = 0; cpu < CPU_SETSIZE; ++cpu) {
    if (CPU_ISSET(cpu, &set)) cpus.push_back(static_cast<std::size_t>(cpu));
  }
  return cpus;
}

std::vector<std::size_t> allowed_cpus() {
  cpu_set_t set;
  CPU_ZERO(&set);
  if (sched_getaffinity(0, sizeof(set), &set) != 0) return {};
  return cpus_of(set);
}

bool pin_handle(pthread_t handle, const std::vector<std::size_t>& cpus) {
  cpu_set_t set;
  CPU_ZERO(&set);
  for (auto cpu : cpus) CPU_SET(static_cast<int>(cpu), &set);
  return pthread_setaffinity_np(handle, sizeof(set), &set) == 0;
}

std::vector<std::size_t> current_thread_cpus() {
  cpu_set_t set;
  CPU_ZERO(&set);
  if (pthread_getaffinity_np(pthread_self(), sizeof(set), &set) != 0) return {};
  return cpus_of(set);
}

#else

std::vector<std::size_t> allowed_cpus() { return {}; }

#endif

}  // namespace

std::size_t detect_core_count() {
  const auto cpus = allowed_cpus();
  if (!cpus.empty()) return cpus.size();
  return std::max(1u, std::thread::hardware_concurrency());
}

std::size_t live_worker_threads() noexcept { return g_live_workers.load(); }

WorkerPool::WorkerPool(const RuntimeConfig& config)
    : num_threads_(config.num_threads),
      core_count_(config.core_count != 0 ? config.core_count : detect_core_count()),
      requested_affinity_(config.affinity),
      effective_affinity_(config.affinity),
      cores_(std::max<std::size_t>(config.num_threads, 1)) {
  if (num_threads_ == 0) throw std::invalid_argument("WorkerPool: num_threads must be >= 1");

  workers_.reserve(num_threads_ - 1);
  try {
    for (std::size_t t = 1; t < num_threads_; ++t) {
      workers_.emplace_back([this, t] { worker_main(t); });
      g_live_workers.fetch_add(1);
    }
  } catch (...) {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    wake_.notify_all();
    for (auto& w : workers_) w.join();
    g_live_workers.fetch_sub(workers_.size());
    throw;
  }

  if (requested_affinity_ == AffinityPolicy::None) return;

  const auto logical = apply_affinity(requested_affinity_, num_threads_, core_count_);
#if YOLOPAR_HAVE_PINNING
  const auto cpus = allowed_cpus();
  if (!cpus.empty()) {
    std::vector<std::size_t> cpu_ids;
    cpu_ids.reserve(logical.size());
    for (const auto& core : logical) cpu_ids.push_back(cpus[*core % cpus.size()]);
    pin_threads(cpu_ids);
    if (effective_affinity_ != AffinityPolicy::None) cores_ = logical;
    if (core_count_ > cpus.size() && warning_.empty()) {
      warning_ = "core_count " + std::to_string(core_count_) + " exceeds the " +
                 std::to_string(cpus.size()) + " available CPUs; logical cores wrap around";
    }
    return;
  }
  warning_ = "cannot read the process CPU mask; affinity downgraded to none";
#else
  (void)logical;
  warning_ = "thread pinning is not supported on this platform; affinity downgraded to none";
#endif
  effective_affinity_ = AffinityPolicy::None;
}

void WorkerPool::pin_threads([[maybe_unused]] const std::vector<std::size_t>& cpu_ids) {
#if YOLOPAR_HAVE_PINNING
  caller_original_cpus_ = current_thread_cpus();
  bool ok = !caller_original_cpus_.empty();
  for (std::size_t t = 1; ok && t < num_threads_; ++t) {
    ok = pin_handle(workers_[t - 1].native_handle(), {cpu_ids[t]});
  }
  if (ok) {
    ok = pin_handle(pthread_self(), {cpu_ids[0]});
    caller_pinned_ = ok;
  }
  if (ok) return;

  // Undo partial pinning so every thread is back on the original mask.
  if (!caller_original_cpus_.empty()) {
    for (auto& w : workers_) pin_handle(w.native_handle(), caller_original_cpus_);
  }
  caller_pinned_ = false;
#endif
  warning_ = "thread pinning failed; affinity downgraded to none";
  effective_affinity_ = AffinityPolicy::None;
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_) w.join();
  g_live_workers.fetch_sub(workers_.size());
#if YOLOPAR_HAVE_PINNING
  if (caller_pinned_) pin_handle(pthread_self(), caller_original_cpus_);
#endif
}

void WorkerPool::worker_main(std::size_t thread_id) {
  std::uint64_t seen = 0;
  std::unique_lock lock(mutex_);
  for (;;) {
    wake_.wait(lock, [&] { return stopping_ || generation_ != seen; });
    if (stopping_) return;
    seen = generation_;
    const auto* task = task_;
    lock.unlock();
    (*task)(thread_id);
    lock.lock();
    if (--pending_ == 0) done_.notify_one();
  }
}

void WorkerPool::run_on_all(const std::function<void(std::size_t)>& task) {
  if (workers_.empty()) {
    task(0);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    task_ = &task;
    pending_ = workers_.size();
    ++generation_;
  }
  wake_.notify_all();
  task(0);
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return pending_ == 0; });
  task_ = nullptr;
}

namespace detail {

void run_chunks(WorkerPool& pool, std::size_t n, const ScheduleSpec& schedule, const ChunkFn& fn,
                LoopStats& stats) {
  const std::size_t threads = pool.num_threads();
  const std::size_t chunk = resolve_chunk(schedule, n, threads);

  stats.trip_count = n;
  stats.chunks_executed_per_thread.assign(threads, 0);
  stats.indices_covered_per_thread.assign(threads, 0);

  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::optional<LoopError> first_error;
  ChunkCursor cursor;

  auto execute = [&](std::size_t thread_id, IndexRange range) {
    try {
      fn(thread_id, range);
    } catch (const LoopError& e) {
      std::lock_guard lock(error_mutex);
      if (!first_error || e.index() < first_error->index()) first_error.emplace(e);
      abort.store(true, std::memory_order_relaxed);
      return;
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first_error || range.lo < first_error->index()) {
        first_error.emplace(range.lo, std::current_exception(),
                            "loop chunk failed at index " + std::to_string(range.lo));
      }
      abort.store(true, std::memory_order_relaxed);
      return;
    }
    ++stats.chunks_executed_per_thread[thread_id];
    stats.indices_covered_per_thread[thread_id] += range.size();
  };

  std::function<void(std::size_t)> task;
  if (schedule.policy == SchedulePolicy::Static) {
    task = [&](std::size_t thread_id) {
      // Chunk k belongs to thread k mod threads; walk this thread's chunks.
      for (std::size_t k = thread_id; k < (n + chunk - 1) / chunk; k += threads) {
        if (abort.load(std::memory_order_relaxed)) return;
        const std::size_t lo = k * chunk;
        const std::size_t hi = n - lo > chunk ? lo + chunk : n;
        execute(thread_id, {lo, hi});
      }
    };
  } else {
    task = [&](std::size_t thread_id) {
      while (!abort.load(std::memory_order_relaxed)) {
        const auto range = claim_next_chunk(cursor, chunk, n);
        if (!range) return;
        execute(thread_id, *range);
      }
    };
  }

  const auto start = std::chrono::steady_clock::now();
  pool.run_on_all(task);
  stats.wall_time = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - start);

  if (first_error) throw *first_error;
}

}  // namespace detail
}  // namespace yolopar
