// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

// Reference implementations used only by the tests. They are written from the
// definitions, not from the library sources, and favor obviousness over speed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include <yolopar/detection.hpp>
#include <yolopar/runtime.hpp>

namespace oracle {

// Round-robin chunk enumeration: per thread, the list of [lo, hi) ranges.
inline std::vector<std::vector<yolopar::IndexRange>> static_partition(std::size_t n,
                                                                      std::size_t threads,
                                                                      std::size_t chunk) {
  std::vector<std::vector<yolopar::IndexRange>> out(threads);
  std::size_t k = 0;
  for (std::size_t lo = 0; lo < n; lo += chunk, ++k) {
    out[k % threads].push_back({lo, std::min(lo + chunk, n)});
  }
  return out;
}

inline bool same_bits(float a, float b) {
  std::uint32_t x, y;
  std::memcpy(&x, &a, 4);
  std::memcpy(&y, &b, 4);
  return x == y;
}

inline bool same_bits(const yolopar::Proposal& a, const yolopar::Proposal& b) {
  return same_bits(a.rect.x, b.rect.x) && same_bits(a.rect.y, b.rect.y) &&
         same_bits(a.rect.w, b.rect.w) && same_bits(a.rect.h, b.rect.h) &&
         same_bits(a.prob, b.prob) && a.label == b.label && a.anchor_index == b.anchor_index;
}

inline bool same_bits(const std::vector<yolopar::Proposal>& a,
                      const std::vector<yolopar::Proposal>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

// prob desc, anchor asc, label asc.
inline std::vector<yolopar::Proposal> canonical(std::vector<yolopar::Proposal> v) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    if (a.anchor_index != b.anchor_index) return a.anchor_index < b.anchor_index;
    return a.label < b.label;
  });
  return v;
}

// Number of (anchor, class) pairs with objectness * score > threshold.
inline std::size_t count_passing(const yolopar::FeatureMap& feat, float threshold) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < feat.num_anchors(); ++i) {
    const auto row = feat.row(i);
    for (std::size_t j = 0; j < feat.num_class(); ++j) {
      const float p = row[4] * row[5 + j];
      if (p > threshold) ++count;
    }
  }
  return count;
}

inline float box_iou(const yolopar::Rect& a, const yolopar::Rect& b) {
  const float ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const float iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (ix <= 0.f || iy <= 0.f) return 0.f;
  const float inter = ix * iy;
  const float uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.f ? inter / uni : 0.f;
}

// Suppression-by-elimination: take the first surviving box, then strike
// every later survivor that overlaps it too much. Quadratic by design.
inline std::vector<std::size_t> brute_force_nms(const std::vector<yolopar::Proposal>& sorted,
                                                float threshold) {
  std::vector<bool> alive(sorted.size(), true);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!alive[i]) continue;
    kept.push_back(i);
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      if (alive[j] && box_iou(sorted[i].rect, sorted[j].rect) > threshold) alive[j] = false;
    }
  }
  return kept;
}

// Boxes on a quarter-pixel lattice, so every corner, area and intersection
// is exact in single precision. Probabilities come from a small set to force
// ties through the canonical order.
inline std::vector<yolopar::Proposal> random_boxes(std::mt19937_64& rng, std::size_t count) {
  std::uniform_int_distribution<int> pos(0, 400);
  std::uniform_int_distribution<int> ext(4, 160);
  std::uniform_int_distribution<int> prob(1, 40);
  std::uniform_int_distribution<int> label(0, 4);
  std::vector<yolopar::Proposal> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto& p = out[i];
    p.rect = {pos(rng) * 0.25f, pos(rng) * 0.25f, ext(rng) * 0.25f, ext(rng) * 0.25f};
    p.prob = static_cast<float>(prob(rng)) / 40.f;
    p.label = label(rng);
    p.anchor_index = static_cast<std::uint32_t>(i);
  }
  return out;
}

}  // namespace oracle
