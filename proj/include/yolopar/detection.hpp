// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

// Anchor-free YOLO post-processing: grid/stride table, per-anchor decode,
// thresholded proposal generation (sequential and parallel), canonical sort
// and greedy class-agnostic NMS.

#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <yolopar/runtime.hpp>

namespace yolopar {

struct GridStride {
  int grid0 = 0;  // x cell
  int grid1 = 0;  // y cell
  int stride = 0;

  friend bool operator==(const GridStride&, const GridStride&) = default;
};

inline constexpr std::size_t kBoxFields = 5;  // dx, dy, dw, dh, objectness

/// Row-major num_anchors x (5 + num_class) matrix of single-precision
/// values. Row layout: [dx, dy, dw, dh, objectness, class_0 ... class_{C-1}].
class FeatureMap {
 public:
  FeatureMap() = default;
  /// Throws std::invalid_argument if values.size() != num_anchors * (5 + num_class).
  FeatureMap(std::size_t num_anchors, std::size_t num_class, std::vector<float> values);

  static FeatureMap zeros(std::size_t num_anchors, std::size_t num_class);

  std::size_t num_anchors() const noexcept { return num_anchors_; }
  std::size_t num_class() const noexcept { return num_class_; }
  std::size_t num_fields() const noexcept { return num_class_ + kBoxFields; }

  std::span<const float> row(std::size_t anchor) const noexcept {
    return {values_.data() + anchor * num_fields(), num_fields()};
  }
  std::span<float> row(std::size_t anchor) noexcept {
    return {values_.data() + anchor * num_fields(), num_fields()};
  }
  std::span<const float> values() const noexcept { return values_; }
  std::span<float> values() noexcept { return values_; }

 private:
  std::size_t num_anchors_ = 0;
  std::size_t num_class_ = 0;
  std::vector<float> values_;
};

struct Rect {
  float x = 0.f;  // left
  float y = 0.f;  // top
  float w = 0.f;
  float h = 0.f;
};

struct Proposal {
  Rect rect;
  int label = 0;
  float prob = 0.f;
  std::uint32_t anchor_index = 0;
};

/// Field-wise bit equality (distinguishes -0 from +0, NaN payloads compare equal to themselves).
bool bitwise_equal(const Proposal& a, const Proposal& b) noexcept;
bool bitwise_equal(std::span<const Proposal> a, std::span<const Proposal> b) noexcept;

struct DetectParams {
  float prob_threshold = 0.25f;
  float nms_threshold = 0.45f;
  int target_size = 640;
  std::vector<int> strides{8, 16, 32};
};

/// Validates DetectParams ranges; throws std::invalid_argument.
void validate(const DetectParams& params);

/// All (g0, g1) cells of each stride level, row-major, levels in the given
/// order. Throws std::invalid_argument unless every stride divides target_size.
std::vector<GridStride> generate_grid_strides(int target_size, std::span<const int> strides);

/// Input size whose grid over `strides` has exactly `num_anchors` cells, if any.
std::optional<int> target_size_for_anchors(std::size_t num_anchors, std::span<const int> strides);

/// center = (offset + grid) * stride, size = exp(log_size) * stride, in
/// single precision. exp overflow propagates as infinity.
Rect decode_anchor(std::span<const float, 4> regression, const GridStride& gs) noexcept;

/// Appends every (anchor, class) proposal of one row whose objectness *
/// class score exceeds prob_threshold, classes ascending.
void emit_anchor_proposals(std::span<const float> row, const GridStride& gs,
                           std::uint32_t anchor_index, float prob_threshold,
                           std::vector<Proposal>& out);

/// Sequential reference. Output in ascending (anchor, class) order.
/// Throws std::invalid_argument if grid_strides.size() != feat.num_anchors().
std::vector<Proposal> generate_proposals_seq(std::span<const GridStride> grid_strides,
                                             const FeatureMap& feat, float prob_threshold);

/// Parallel over anchors. Same multiset as the sequential reference; order
/// follows parallel_for_collect.
std::vector<Proposal> generate_proposals_par(WorkerPool& pool, const ScheduleSpec& schedule,
                                             std::span<const GridStride> grid_strides,
                                             const FeatureMap& feat, float prob_threshold,
                                             LoopStats* stats = nullptr);

/// Canonical total order: prob descending, then anchor ascending, then label ascending.
bool canonical_less(const Proposal& a, const Proposal& b) noexcept;
std::vector<Proposal> sort_proposals(std::vector<Proposal> proposals);

float iou(const Rect& a, const Rect& b) noexcept;

/// Greedy class-agnostic NMS over a canonically sorted list. Returns kept
/// positions, ascending.
std::vector<std::size_t> nms(std::span<const Proposal> sorted, float nms_threshold);

struct SequentialExecutor {};
struct ParallelExecutor {
  WorkerPool* pool = nullptr;
  ScheduleSpec schedule;
};
using Executor = std::variant<SequentialExecutor, ParallelExecutor>;

struct StageTimings {
  std::chrono::nanoseconds proposal_generation{0};
  std::chrono::nanoseconds total{0};
};

struct PostprocessResult {
  std::vector<Proposal> detections;  // canonical order
  std::size_t proposal_count = 0;
  StageTimings timings;
};

/// grid -> proposals (separately timed) -> canonical sort -> NMS.
PostprocessResult postprocess(const FeatureMap& feat, const DetectParams& params,
                              const Executor& executor);

}  // namespace yolopar
