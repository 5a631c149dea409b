// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/workload.hpp>

#include <array>
#include <atomic>

namespace yolopar {
namespace {

constexpr std::size_t kDim = 64;

std::atomic<std::size_t> g_live_load{0};

void load_loop(std::stop_token stop, std::atomic<std::uint64_t>& done, std::uint64_t seed) {
  std::vector<float> a(kDim * kDim), b(kDim * kDim), c(kDim * kDim);
  SplitMix64 rng(seed);
  for (auto& v : a) v = rng.next_unit();
  for (auto& v : b) v = rng.next_unit();
  [[maybe_unused]] volatile float checksum = 0.f;

  while (!stop.stop_requested()) {
    for (std::size_t i = 0; i < kDim; ++i) {
      for (std::size_t j = 0; j < kDim; ++j) c[i * kDim + j] = 0.f;
      for (std::size_t k = 0; k < kDim; ++k) {
        const float aik = a[i * kDim + k];
        for (std::size_t j = 0; j < kDim; ++j) c[i * kDim + j] += aik * b[k * kDim + j];
      }
    }
    float sum = 0.f;
    for (float v : c) sum += v;
    checksum = sum;
    done.fetch_add(1, std::memory_order_relaxed);
  }
}

}  // namespace

struct BackgroundLoad::Counters {
  std::atomic<std::uint64_t> multiplies{0};
};

std::size_t live_load_threads() noexcept { return g_live_load.load(); }

BackgroundLoad BackgroundLoad::start(std::size_t num_threads) {
  BackgroundLoad load;
  if (num_threads == 0) return load;
  load.counters_ = std::make_shared<Counters>();
  load.threads_.reserve(num_threads);
  for (std::size_t t = 0; t < num_threads; ++t) {
    load.threads_.emplace_back(load_loop, std::ref(load.counters_->multiplies), t + 1);
    g_live_load.fetch_add(1);
  }
  return load;
}

BackgroundLoad& BackgroundLoad::operator=(BackgroundLoad&& other) noexcept {
  if (this != &other) {
    stop();
    threads_ = std::move(other.threads_);
    counters_ = std::move(other.counters_);
  }
  return *this;
}

void BackgroundLoad::stop() noexcept {
  for (auto& t : threads_) t.request_stop();
  for (auto& t : threads_) {
    if (t.joinable()) t.join();
  }
  g_live_load.fetch_sub(threads_.size());
  threads_.clear();
}

std::uint64_t BackgroundLoad::multiplies_completed() const noexcept {
  return counters_ ? counters_->multiplies.load() : 0;
}

}  // namespace yolopar
