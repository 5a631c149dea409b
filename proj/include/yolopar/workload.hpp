// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic feature maps, the FMAP binary format and a background compute
// load that competes with the measured loop for CPU time.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include <yolopar/detection.hpp>

namespace yolopar {

struct SplitMix64Step {
  std::uint64_t value;
  std::uint64_t next_state;
};

/// One SplitMix64 step from `state` (all arithmetic mod 2^64).
constexpr SplitMix64Step splitmix64_next(std::uint64_t state) noexcept {
  const std::uint64_t next = state + 0x9E3779B97F4A7C15ull;
  std::uint64_t z = next;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return {z ^ (z >> 31), next};
}

/// Top 24 bits scaled into [0, 1); exact in single precision.
constexpr float unit_float(std::uint64_t value) noexcept {
  return static_cast<float>(value >> 40) * 0x1.0p-24f;
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t operator()() noexcept {
    const auto step = splitmix64_next(state_);
    state_ = step.next_state;
    return step.value;
  }
  constexpr float next_unit() noexcept { return unit_float((*this)()); }
  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

struct SynthSpec {
  std::uint64_t seed = 42;
  std::size_t num_anchors = 8400;
  std::size_t num_class = 80;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

/// Deterministic map: one stream seeded with spec.seed, one draw per field,
/// row-major. dx, dy = 2u - 0.5; dw, dh = 4u - 2; objectness and class
/// scores = u^3. Throws std::invalid_argument for zero dimensions.
FeatureMap synth_feature_map(const SynthSpec& spec);

enum class FmapErrc {
  io_error = 1,
  bad_magic,
  unsupported_version,
  truncated,
  malformed_header,
  trailing_data,
};

const char* to_string(FmapErrc code) noexcept;

class FmapError : public std::runtime_error {
 public:
  FmapError(FmapErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  FmapErrc code() const noexcept { return code_; }

 private:
  FmapErrc code_;
};

inline constexpr std::uint32_t kFmapVersion = 1;

// FMAP layout, little-endian:
//   "FMAP" | u32 version = 1 | u32 num_anchors | u32 num_fields (5 + num_class)
//   | num_anchors * num_fields binary32 values, row-major.
std::vector<std::byte> encode_feature_map(const FeatureMap& feat);
FeatureMap decode_feature_map(std::span<const std::byte> bytes);

void write_feature_map(const FeatureMap& feat, const std::filesystem::path& path);
FeatureMap read_feature_map(const std::filesystem::path& path);

/// Threads spinning on a dense 64x64 single-precision matrix multiply over
/// private buffers until stopped. Zero threads is a no-op.
class BackgroundLoad {
 public:
  BackgroundLoad() = default;
  ~BackgroundLoad() { stop(); }

  BackgroundLoad(BackgroundLoad&&) noexcept = default;
  BackgroundLoad& operator=(BackgroundLoad&& other) noexcept;
  BackgroundLoad(const BackgroundLoad&) = delete;
  BackgroundLoad& operator=(const BackgroundLoad&) = delete;

  static BackgroundLoad start(std::size_t num_threads);

  /// Requests stop and joins every load thread. Idempotent.
  void stop() noexcept;

  std::size_t num_threads() const noexcept { return threads_.size(); }
  /// Multiplies finished so far across all threads.
  std::uint64_t multiplies_completed() const noexcept;

 private:
  struct Counters;
  std::vector<std::jthread> threads_;
  std::shared_ptr<Counters> counters_;
};

/// Load threads currently alive in the process.
std::size_t live_load_threads() noexcept;

}  // namespace yolopar
