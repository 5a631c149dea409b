// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include <yolopar/detection.hpp>
#include <yolopar/workload.hpp>

#include "../support/oracles.hpp"

using namespace yolopar;

namespace {

Rect decode(std::array<float, 4> reg, GridStride gs) {
  return decode_anchor(std::span<const float, 4>(reg), gs);
}

bool rect_eq(const Rect& a, const Rect& b) {
  return oracle::same_bits(a.x, b.x) && oracle::same_bits(a.y, b.y) && oracle::same_bits(a.w, b.w) &&
         oracle::same_bits(a.h, b.h);
}

const std::vector<int> kStrides{8, 16, 32};

Proposal prop(float prob, std::uint32_t anchor, int label = 0, Rect r = {0, 0, 10, 10}) {
  Proposal p;
  p.rect = r;
  p.prob = prob;
  p.anchor_index = anchor;
  p.label = label;
  return p;
}

const FeatureMap& small_map() {
  static const FeatureMap map = synth_feature_map({7, 2100, 12});
  return map;
}

}  // namespace

TEST_CASE("grid strides") {
  CHECK(generate_grid_strides(640, kStrides).size() == 8400);
  const std::vector<int> s32{32};
  CHECK(generate_grid_strides(32, s32) == std::vector<GridStride>{{0, 0, 32}});
  CHECK(generate_grid_strides(64, s32) ==
        std::vector<GridStride>{{0, 0, 32}, {1, 0, 32}, {0, 1, 32}, {1, 1, 32}});
  const auto g = generate_grid_strides(640, kStrides);
  CHECK(g[0] == GridStride{0, 0, 8});
  CHECK(g[6399] == GridStride{79, 79, 8});
  CHECK(g[6400] == GridStride{0, 0, 16});
  CHECK(g[8399] == GridStride{19, 19, 32});
  CHECK_THROWS_AS(generate_grid_strides(100, kStrides), std::invalid_argument);
}

TEST_CASE("target size from anchor count") {
  CHECK(target_size_for_anchors(8400, kStrides) == 640);
  CHECK(target_size_for_anchors(2100, kStrides) == 320);
  CHECK(target_size_for_anchors(21, kStrides) == 32);
  CHECK_FALSE(target_size_for_anchors(8401, kStrides));
  CHECK_FALSE(target_size_for_anchors(0, kStrides));
}

TEST_CASE("decode_anchor examples") {
  CHECK(rect_eq(decode({0.5f, 0.5f, 0.f, 0.f}, {0, 0, 8}), Rect{0, 0, 8, 8}));
  for (int s : {1, 8, 16, 32}) {
    const float f = static_cast<float>(s);
    CHECK(rect_eq(decode({0, 0, 0, 0}, {0, 0, s}), Rect{-f / 2, -f / 2, f, f}));
  }
  const float ln2 = std::log(2.0f);
  const Rect r = decode({0.5f, 0.5f, ln2, ln2}, {3, 1, 16});
  CHECK(r.x == doctest::Approx(40).epsilon(1e-5));
  CHECK(r.y == doctest::Approx(8).epsilon(1e-5));
  CHECK(r.w == doctest::Approx(32).epsilon(1e-5));
  CHECK(r.h == doctest::Approx(32).epsilon(1e-5));
  CHECK(rect_eq(r, decode({0.5f, 0.5f, ln2, ln2}, {3, 1, 16})));
}

TEST_CASE("decode_anchor overflow propagates as infinity") {
  const Rect r = decode({0, 0, 200.f, 0}, {0, 0, 8});
  CHECK(std::isinf(r.w));
  CHECK(r.h == 8.f);
}

TEST_CASE("generate_proposals_seq examples") {
  const auto grid = generate_grid_strides(640, kStrides);
  CHECK(generate_proposals_seq(grid, FeatureMap::zeros(8400, 80), 0.25f).empty());

  std::vector<float> row(5 + 80, 0.f);
  row[0] = row[1] = 0.5f;
  row[4] = 1.f;
  row[5 + 3] = 1.f;
  const FeatureMap one(1, 80, row);
  const std::vector<GridStride> g1{{0, 0, 8}};
  const auto out = generate_proposals_seq(g1, one, 0.25f);
  REQUIRE(out.size() == 1);
  CHECK(rect_eq(out[0].rect, Rect{0, 0, 8, 8}));
  CHECK(out[0].label == 3);
  CHECK(out[0].prob == 1.f);
  CHECK(out[0].anchor_index == 0);

  CHECK(generate_proposals_seq(g1, one, 1.0f).empty());
  const auto& map = small_map();
  CHECK(generate_proposals_seq(generate_grid_strides(320, kStrides), map, 1.0f).empty());
  CHECK_THROWS_AS(generate_proposals_seq(g1, map, 0.25f), std::invalid_argument);
}

TEST_CASE("emission is exactly the passing pairs, in (anchor, class) order") {
  const auto& map = small_map();
  const auto grid = generate_grid_strides(320, kStrides);
  for (float thr : {0.0f, 0.05f, 0.25f, 0.5f, 0.9f}) {
    const auto out = generate_proposals_seq(grid, map, thr);
    CHECK(out.size() == oracle::count_passing(map, thr));
    for (std::size_t k = 0; k < out.size(); ++k) {
      const auto& p = out[k];
      CHECK(p.prob > thr);
      const auto row = map.row(p.anchor_index);
      CHECK(oracle::same_bits(p.prob, row[4] * row[5 + p.label]));
      if (k > 0) {
        const auto& q = out[k - 1];
        CHECK((q.anchor_index < p.anchor_index ||
               (q.anchor_index == p.anchor_index && q.label < p.label)));
      }
    }
  }
}

TEST_CASE("generate_proposals_par matches the sequential reference") {
  const auto& map = small_map();
  const auto grid = generate_grid_strides(320, kStrides);
  const auto seq = generate_proposals_seq(grid, map, 0.25f);
  REQUIRE_FALSE(seq.empty());

  WorkerPool single({1, AffinityPolicy::None, 0});
  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    CHECK(oracle::same_bits(generate_proposals_par(single, {policy, 3}, grid, map, 0.25f), seq));
  }

  WorkerPool pool({4, AffinityPolicy::None, 0});
  for (auto policy : {SchedulePolicy::Static, SchedulePolicy::Dynamic}) {
    for (std::optional<std::size_t> chunk : {std::optional<std::size_t>{}, std::optional<std::size_t>{1},
                                              std::optional<std::size_t>{124},
                                              std::optional<std::size_t>{2100}}) {
      LoopStats stats;
      const auto par = generate_proposals_par(pool, {policy, chunk}, grid, map, 0.25f, &stats);
      CHECK(oracle::same_bits(oracle::canonical(par), oracle::canonical(seq)));
      CHECK(stats.trip_count == 2100);
    }
  }
  CHECK(generate_proposals_par(pool, {}, {}, FeatureMap::zeros(0, 80), 0.25f).empty());
}

TEST_CASE("seed-42 map: 4 threads, dynamic chunk 124") {
  const auto map = synth_feature_map({42, 8400, 80});
  const auto grid = generate_grid_strides(640, kStrides);
  WorkerPool pool({4, AffinityPolicy::None, 0});
  const auto par = generate_proposals_par(pool, {SchedulePolicy::Dynamic, 124}, grid, map, 0.25f);
  CHECK(oracle::same_bits(oracle::canonical(par),
                          oracle::canonical(generate_proposals_seq(grid, map, 0.25f))));
}

TEST_CASE("decode locality under anchor permutation") {
  const auto& map = small_map();
  const auto grid = generate_grid_strides(320, kStrides);
  std::vector<std::size_t> perm(map.num_anchors());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(3);
  std::shuffle(perm.begin(), perm.end(), rng);

  FeatureMap shuffled = FeatureMap::zeros(map.num_anchors(), map.num_class());
  std::vector<GridStride> shuffled_grid(grid.size());
  for (std::size_t k = 0; k < perm.size(); ++k) {
    const auto src = map.row(perm[k]);
    std::copy(src.begin(), src.end(), shuffled.row(k).begin());
    shuffled_grid[k] = grid[perm[k]];
  }
  auto moved = generate_proposals_seq(shuffled_grid, shuffled, 0.25f);
  for (auto& p : moved) p.anchor_index = static_cast<std::uint32_t>(perm[p.anchor_index]);
  CHECK(oracle::same_bits(oracle::canonical(moved),
                          oracle::canonical(generate_proposals_seq(grid, map, 0.25f))));
}

TEST_CASE("sort_proposals") {
  CHECK(sort_proposals({}).empty());
  auto two = sort_proposals({prop(0.3f, 5), prop(0.9f, 2)});
  CHECK(two[0].anchor_index == 2);
  CHECK(two[1].anchor_index == 5);
  auto tie = sort_proposals({prop(0.5f, 7, 1), prop(0.5f, 3, 2)});
  CHECK(tie[0].anchor_index == 3);
  auto labels = sort_proposals({prop(0.5f, 3, 9), prop(0.5f, 3, 2)});
  CHECK(labels[0].label == 2);

  std::mt19937_64 rng(11);
  auto boxes = oracle::random_boxes(rng, 300);
  CHECK(oracle::same_bits(sort_proposals(boxes), oracle::canonical(boxes)));
}

TEST_CASE("iou") {
  const Rect a{0, 0, 2, 2};
  CHECK(iou(a, a) == 1.f);
  CHECK(iou(a, Rect{5, 5, 1, 1}) == 0.f);
  CHECK(iou(a, Rect{2, 0, 2, 2}) == 0.f);
  CHECK(iou(a, Rect{1, 1, 2, 2}) == doctest::Approx(1.0 / 7.0).epsilon(1e-6));
  CHECK(iou(Rect{0, 0, 0, 0}, Rect{0, 0, 0, 0}) == 0.f);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> pos(-100.f, 100.f), ext(0.01f, 80.f);
  for (int i = 0; i < 5000; ++i) {
    const Rect r{pos(rng), pos(rng), ext(rng), ext(rng)};
    const Rect s{pos(rng), pos(rng), ext(rng), ext(rng)};
    CHECK(iou(r, s) == iou(s, r));
    CHECK(iou(r, r) == 1.f);
    CHECK(iou(r, s) >= 0.f);
    CHECK(iou(r, s) <= 1.f);
  }
}

TEST_CASE("nms examples") {
  const std::vector<Proposal> single{prop(0.9f, 0)};
  CHECK(nms(single, 0.45f) == std::vector<std::size_t>{0});
  const std::vector<Proposal> dup{prop(0.9f, 0), prop(0.8f, 1)};
  CHECK(nms(dup, 0.45f) == std::vector<std::size_t>{0});
  const std::vector<Proposal> apart{prop(0.9f, 0, 0, {0, 0, 10, 10}), prop(0.8f, 1, 0, {20, 0, 10, 10})};
  CHECK(nms(apart, 0.45f) == std::vector<std::size_t>{0, 1});
  CHECK(nms(std::vector<Proposal>{}, 0.45f).empty());
  // class-agnostic: different labels still suppress each other
  const std::vector<Proposal> labels{prop(0.9f, 0, 1), prop(0.8f, 0, 2)};
  CHECK(nms(labels, 0.45f).size() == 1);
}

TEST_CASE("nms against brute-force greedy oracle") {
  std::mt19937_64 rng(2024);
  for (int seed = 0; seed < 30; ++seed) {
    const auto sorted = oracle::canonical(oracle::random_boxes(rng, 200));
    for (float thr : {0.1f, 0.45f, 0.7f}) {
      CHECK(nms(sorted, thr) == oracle::brute_force_nms(sorted, thr));
    }
  }
}

TEST_CASE("nms monotone in the threshold") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sorted = sort_proposals(oracle::random_boxes(rng, 250));
    std::size_t prev = 0;
    for (float thr = 0.f; thr <= 1.0f; thr += 0.05f) {
      const auto kept = nms(sorted, thr).size();
      CHECK(kept >= prev);
      prev = kept;
    }
  }
}

TEST_CASE("postprocess") {
  DetectParams params;
  const auto zeros = postprocess(FeatureMap::zeros(8400, 80), params, SequentialExecutor{});
  CHECK(zeros.detections.empty());
  CHECK(zeros.proposal_count == 0);
  CHECK(zeros.timings.total.count() > 0);
  CHECK(zeros.timings.proposal_generation.count() > 0);

  const auto map = synth_feature_map({42, 8400, 80});
  const auto seq = postprocess(map, params, SequentialExecutor{});
  WorkerPool pool({4, AffinityPolicy::None, 0});
  const auto par = postprocess(map, params, ParallelExecutor{&pool, {SchedulePolicy::Static, 124}});
  CHECK(oracle::same_bits(par.detections, seq.detections));
  CHECK(par.proposal_count == seq.proposal_count);
  CHECK(seq.timings.total >= seq.timings.proposal_generation);
  CHECK(std::is_sorted(seq.detections.begin(), seq.detections.end(), canonical_less));
  for (std::size_t i = 0; i < seq.detections.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      REQUIRE(oracle::box_iou(seq.detections[i].rect, seq.detections[j].rect) <= params.nms_threshold);
    }
  }

  params.prob_threshold = 1.0f;
  const auto none = postprocess(map, params, ParallelExecutor{&pool, {SchedulePolicy::Dynamic, 8}});
  CHECK(none.detections.empty());
  CHECK(none.proposal_count == 0);
}

TEST_CASE("detect params validation") {
  DetectParams p;
  CHECK_NOTHROW(validate(p));
  p.prob_threshold = -0.1f;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.nms_threshold = 1.5f;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.target_size = 0;
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p = {};
  p.strides.clear();
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
}

TEST_CASE("feature map shape checks") {
  CHECK_THROWS_AS(FeatureMap(2, 3, std::vector<float>(15)), std::invalid_argument);
  const FeatureMap m(2, 3, std::vector<float>(16));
  CHECK(m.num_fields() == 8);
  CHECK(m.row(1).size() == 8);
}
