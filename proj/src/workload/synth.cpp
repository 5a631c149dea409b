// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/workload.hpp>

namespace yolopar {

FeatureMap synth_feature_map(const SynthSpec& spec) {
  if (spec.num_anchors == 0 || spec.num_class == 0) {
    throw std::invalid_argument("synth_feature_map: dimensions must be positive");
  }
  const std::size_t fields = spec.num_class + kBoxFields;
  std::vector<float> values(spec.num_anchors * fields);
  SplitMix64 rng(spec.seed);

  for (std::size_t i = 0; i < spec.num_anchors; ++i) {
    float* row = values.data() + i * fields;
    row[0] = 2.0f * rng.next_unit() - 0.5f;
    row[1] = 2.0f * rng.next_unit() - 0.5f;
    row[2] = 4.0f * rng.next_unit() - 2.0f;
    row[3] = 4.0f * rng.next_unit() - 2.0f;
    for (std::size_t f = 4; f < fields; ++f) {
      const float u = rng.next_unit();
      row[f] = u * u * u;
    }
  }
  return FeatureMap(spec.num_anchors, spec.num_class, std::move(values));
}

}  // namespace yolopar
