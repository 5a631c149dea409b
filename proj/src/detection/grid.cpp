// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/detection.hpp>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace yolopar {

void validate(const DetectParams& params) {
  if (!(params.prob_threshold >= 0.f && params.prob_threshold <= 1.f)) {
    throw std::invalid_argument("prob_threshold must lie in [0, 1]");
  }
  if (!(params.nms_threshold > 0.f && params.nms_threshold <= 1.f)) {
    throw std::invalid_argument("nms_threshold must lie in (0, 1]");
  }
  if (params.target_size <= 0) throw std::invalid_argument("target_size must be positive");
  if (params.strides.empty()) throw std::invalid_argument("at least one stride is required");
}

std::vector<GridStride> generate_grid_strides(int target_size, std::span<const int> strides) {
  std::size_t total = 0;
  for (int stride : strides) {
    if (stride <= 0 || target_size <= 0 || target_size % stride != 0) {
      throw std::invalid_argument("target size " + std::to_string(target_size) +
                                  " is not divisible by stride " + std::to_string(stride));
    }
    const auto cells = static_cast<std::size_t>(target_size / stride);
    total += cells * cells;
  }

  std::vector<GridStride> grid;
  grid.reserve(total);
  for (int stride : strides) {
    const int cells = target_size / stride;
    for (int g1 = 0; g1 < cells; ++g1) {
      for (int g0 = 0; g0 < cells; ++g0) grid.push_back({g0, g1, stride});
    }
  }
  return grid;
}

std::optional<int> target_size_for_anchors(std::size_t num_anchors,
                                           std::span<const int> strides) {
  if (strides.empty() || num_anchors == 0) return std::nullopt;
  // Cell count grows monotonically with the target size, so scan multiples
  // of the strides' lcm until it is reached or passed.
  int step = 1;
  for (int s : strides) {
    if (s <= 0) return std::nullopt;
    step = std::lcm(step, s);
  }
  for (long long size = step;; size += step) {
    std::size_t cells = 0;
    for (int s : strides) {
      const auto per_side = static_cast<std::size_t>(size / s);
      cells += per_side * per_side;
    }
    if (cells == num_anchors) return static_cast<int>(size);
    if (cells > num_anchors || size > (1 << 24)) return std::nullopt;
  }
}

}  // namespace yolopar
