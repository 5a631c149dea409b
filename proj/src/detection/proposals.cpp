// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/detection.hpp>

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace yolopar {

FeatureMap::FeatureMap(std::size_t num_anchors, std::size_t num_class, std::vector<float> values)
    : num_anchors_(num_anchors), num_class_(num_class), values_(std::move(values)) {
  if (values_.size() != num_anchors_ * num_fields()) {
    throw std::invalid_argument("FeatureMap: expected " +
                                std::to_string(num_anchors_ * num_fields()) + " values, got " +
                                std::to_string(values_.size()));
  }
}

FeatureMap FeatureMap::zeros(std::size_t num_anchors, std::size_t num_class) {
  return FeatureMap(num_anchors, num_class,
                    std::vector<float>(num_anchors * (num_class + kBoxFields), 0.f));
}

namespace {

bool same_bits(float a, float b) noexcept {
  return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b);
}

}  // namespace

bool bitwise_equal(const Proposal& a, const Proposal& b) noexcept {
  return same_bits(a.rect.x, b.rect.x) && same_bits(a.rect.y, b.rect.y) &&
         same_bits(a.rect.w, b.rect.w) && same_bits(a.rect.h, b.rect.h) && a.label == b.label &&
         same_bits(a.prob, b.prob) && a.anchor_index == b.anchor_index;
}

bool bitwise_equal(std::span<const Proposal> a, std::span<const Proposal> b) noexcept {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bitwise_equal(a[i], b[i])) return false;
  }
  return true;
}

Rect decode_anchor(std::span<const float, 4> regression, const GridStride& gs) noexcept {
  const auto stride = static_cast<float>(gs.stride);
  const float x_center = (regression[0] + static_cast<float>(gs.grid0)) * stride;
  const float y_center = (regression[1] + static_cast<float>(gs.grid1)) * stride;
  const float w = std::exp(regression[2]) * stride;
  const float h = std::exp(regression[3]) * stride;
  return {x_center - w * 0.5f, y_center - h * 0.5f, w, h};
}

void emit_anchor_proposals(std::span<const float> row, const GridStride& gs,
                           std::uint32_t anchor_index, float prob_threshold,
                           std::vector<Proposal>& out) {
  const Rect rect = decode_anchor(row.first<4>(), gs);
  const float objectness = row[4];
  const auto scores = row.subspan(kBoxFields);
  for (std::size_t j = 0; j < scores.size(); ++j) {
    const float box_prob = objectness * scores[j];
    if (box_prob > prob_threshold) {
      out.push_back({rect, static_cast<int>(j), box_prob, anchor_index});
    }
  }
}

namespace {

void check_shapes(std::span<const GridStride> grid_strides, const FeatureMap& feat) {
  if (grid_strides.size() != feat.num_anchors()) {
    throw std::invalid_argument("grid has " + std::to_string(grid_strides.size()) +
                                " cells but the feature map has " +
                                std::to_string(feat.num_anchors()) + " anchors");
  }
}

}  // namespace

std::vector<Proposal> generate_proposals_seq(std::span<const GridStride> grid_strides,
                                             const FeatureMap& feat, float prob_threshold) {
  check_shapes(grid_strides, feat);
  std::vector<Proposal> out;
  for (std::size_t i = 0; i < feat.num_anchors(); ++i) {
    emit_anchor_proposals(feat.row(i), grid_strides[i], static_cast<std::uint32_t>(i),
                          prob_threshold, out);
  }
  return out;
}

std::vector<Proposal> generate_proposals_par(WorkerPool& pool, const ScheduleSpec& schedule,
                                             std::span<const GridStride> grid_strides,
                                             const FeatureMap& feat, float prob_threshold,
                                             LoopStats* stats) {
  check_shapes(grid_strides, feat);
  auto [proposals, loop_stats] = parallel_for_collect<Proposal>(
      pool, feat.num_anchors(), schedule, [&](std::size_t i, std::vector<Proposal>& out) {
        emit_anchor_proposals(feat.row(i), grid_strides[i], static_cast<std::uint32_t>(i),
                              prob_threshold, out);
      });
  if (stats) *stats = std::move(loop_stats);
  return std::move(proposals);
}

}  // namespace yolopar
