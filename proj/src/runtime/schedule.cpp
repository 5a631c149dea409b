// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/runtime.hpp>

#include <algorithm>
#include <stdexcept>

namespace yolopar {

const char* to_string(SchedulePolicy policy) noexcept {
  switch (policy) {
    case SchedulePolicy::Static:
      return "static";
    case SchedulePolicy::Dynamic:
      return "dynamic";
  }
  return "?";
}

const char* to_string(AffinityPolicy policy) noexcept {
  switch (policy) {
    case AffinityPolicy::None:
      return "none";
    case AffinityPolicy::Spread:
      return "spread";
    case AffinityPolicy::Close:
      return "close";
    case AffinityPolicy::Master:
      return "master";
  }
  return "?";
}

std::optional<SchedulePolicy> parse_schedule_policy(std::string_view text) noexcept {
  if (text == "static") return SchedulePolicy::Static;
  if (text == "dynamic") return SchedulePolicy::Dynamic;
  return std::nullopt;
}

std::optional<AffinityPolicy> parse_affinity_policy(std::string_view text) noexcept {
  if (text == "none") return AffinityPolicy::None;
  if (text == "spread") return AffinityPolicy::Spread;
  if (text == "close") return AffinityPolicy::Close;
  if (text == "master") return AffinityPolicy::Master;
  return std::nullopt;
}

std::size_t resolve_chunk(const ScheduleSpec& schedule, std::size_t n, std::size_t num_threads) {
  if (num_threads == 0) throw std::invalid_argument("num_threads must be >= 1");
  if (schedule.chunk) {
    if (*schedule.chunk == 0) throw std::invalid_argument("chunk size must be >= 1");
    return *schedule.chunk;
  }
  if (schedule.policy == SchedulePolicy::Dynamic) return 1;
  return std::max<std::size_t>(1, (n + num_threads - 1) / num_threads);
}

std::size_t ChunkAssignment::index_count() const noexcept {
  std::size_t count = 0;
  for (const auto& r : ranges) count += r.size();
  return count;
}

std::vector<CoreAssignment> apply_affinity(AffinityPolicy policy, std::size_t num_threads,
                                           std::size_t core_count) {
  if (num_threads == 0 || core_count == 0) {
    throw std::invalid_argument("apply_affinity: num_threads and core_count must be >= 1");
  }
  std::vector<CoreAssignment> cores(num_threads);
  for (std::size_t t = 0; t < num_threads; ++t) {
    switch (policy) {
      case AffinityPolicy::None:
        break;
      case AffinityPolicy::Master:
        cores[t] = 0;
        break;
      case AffinityPolicy::Close:
        cores[t] = t % core_count;
        break;
      case AffinityPolicy::Spread:
        cores[t] = (t * core_count / num_threads) % core_count;
        break;
    }
  }
  return cores;
}

std::vector<ChunkAssignment> partition_static(std::size_t n, std::size_t num_threads,
                                              std::size_t chunk) {
  if (num_threads == 0) throw std::invalid_argument("partition_static: num_threads must be >= 1");
  if (chunk == 0) throw std::invalid_argument("partition_static: chunk must be >= 1");

  std::vector<ChunkAssignment> out(num_threads);
  for (std::size_t t = 0; t < num_threads; ++t) out[t].thread_id = t;

  std::size_t k = 0;
  for (std::size_t lo = 0; lo < n; ++k) {
    const std::size_t hi = n - lo > chunk ? lo + chunk : n;
    out[k % num_threads].ranges.push_back({lo, hi});
    lo = hi;
  }
  return out;
}

std::optional<IndexRange> claim_next_chunk(ChunkCursor& cursor, std::size_t chunk,
                                           std::size_t n) noexcept {
  // CAS instead of fetch_add so the cursor never runs past n.
  std::size_t lo = cursor.next_.load(std::memory_order_relaxed);
  while (lo < n) {
    const std::size_t hi = n - lo > chunk ? lo + chunk : n;
    if (cursor.next_.compare_exchange_weak(lo, hi, std::memory_order_relaxed)) {
      return IndexRange{lo, hi};
    }
  }
  return std::nullopt;
}

LoopError::LoopError(std::size_t index, std::exception_ptr cause, const std::string& what)
    : std::runtime_error(what), index_(index), cause_(std::move(cause)) {}

}  // namespace yolopar
