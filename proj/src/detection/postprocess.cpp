// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/detection.hpp>

#include <stdexcept>

namespace yolopar {

PostprocessResult postprocess(const FeatureMap& feat, const DetectParams& params,
                              const Executor& executor) {
  using clock = std::chrono::steady_clock;
  validate(params);

  PostprocessResult result;
  const auto start = clock::now();

  const auto grid = generate_grid_strides(params.target_size, params.strides);

  const auto gen_start = clock::now();
  std::vector<Proposal> proposals;
  if (const auto* par = std::get_if<ParallelExecutor>(&executor)) {
    if (par->pool == nullptr) throw std::invalid_argument("postprocess: null worker pool");
    proposals =
        generate_proposals_par(*par->pool, par->schedule, grid, feat, params.prob_threshold);
  } else {
    proposals = generate_proposals_seq(grid, feat, params.prob_threshold);
  }
  const auto gen_end = clock::now();

  result.proposal_count = proposals.size();
  proposals = sort_proposals(std::move(proposals));
  const auto picked = nms(proposals, params.nms_threshold);
  result.detections.reserve(picked.size());
  for (std::size_t k : picked) result.detections.push_back(proposals[k]);

  const auto end = clock::now();
  result.timings.proposal_generation =
      std::chrono::duration_cast<std::chrono::nanoseconds>(gen_end - gen_start);
  result.timings.total = std::chrono::duration_cast<std::chrono::nanoseconds>(end - start);
  return result;
}

}  // namespace yolopar
