// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/detection.hpp>

#include <algorithm>
#include <cassert>

namespace yolopar {

bool canonical_less(const Proposal& a, const Proposal& b) noexcept {
  if (a.prob != b.prob) return a.prob > b.prob;
  if (a.anchor_index != b.anchor_index) return a.anchor_index < b.anchor_index;
  return a.label < b.label;
}

std::vector<Proposal> sort_proposals(std::vector<Proposal> proposals) {
  std::sort(proposals.begin(), proposals.end(), canonical_less);
  return proposals;
}

namespace {

// Boxes are compared in corner form and areas are taken from the corner
// differences, so iou(a, a) is exactly 1 for any positive-area box.
struct Corners {
  float x0, y0, x1, y1, area;
};

Corners corners_of(const Rect& r) noexcept {
  const float x1 = r.x + r.w;
  const float y1 = r.y + r.h;
  return {r.x, r.y, x1, y1, (x1 - r.x) * (y1 - r.y)};
}

float corner_iou(const Corners& a, const Corners& b) noexcept {
  const float overlap_x = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const float overlap_y = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const float inter = std::max(0.f, overlap_x) * std::max(0.f, overlap_y);
  const float uni = a.area + b.area - inter;
  if (!(uni > 0.f)) return 0.f;
  return inter / uni;
}

}  // namespace

float iou(const Rect& a, const Rect& b) noexcept { return corner_iou(corners_of(a), corners_of(b)); }

std::vector<std::size_t> nms(std::span<const Proposal> sorted, float nms_threshold) {
  assert(std::is_sorted(sorted.begin(), sorted.end(), canonical_less));
  std::vector<std::size_t> picked;
  std::vector<Corners> kept;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const Corners box = corners_of(sorted[i].rect);
    bool keep = true;
    for (const auto& k : kept) {
      if (corner_iou(box, k) > nms_threshold) {
        keep = false;
        break;
      }
    }
    if (keep) {
      picked.push_back(i);
      kept.push_back(box);
    }
  }
  return picked;
}

}  // namespace yolopar
