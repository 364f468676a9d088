#pragma once

// Random neighbourhood search: uniform exploration, switching to exploitation
// of the L-infinity neighbourhood of the most recent high-scoring point. The
// kd-tree over already-tested points rejects proposals that would retest a
// known point.

#include <algorithm>
#include <cstddef>
#include <span>

#include "advtest/rng.hpp"
#include "advtest/sampling/feedback.hpp"
#include "advtest/sampling/kd_tree.hpp"
#include "advtest/sampling/passive.hpp"

namespace advtest::sampling {

struct RnsConfig {
  double radius = 0.1;     // L-infinity half-width, normalized units, (0,1]
  double threshold = 0.0;  // exploit when the last score exceeds this
  double novelty = 0.01;   // minimum Euclidean distance to any tested point
  std::size_t retries = 32;
};

inline SamplePoint rns_next(std::size_t dims, std::span<const SamplerFeedback> history, const KdTree<double>& kd,
                            Rng& rng, const RnsConfig& cfg) {
  if (history.empty() || !(history.back().test_score > cfg.threshold)) return random_next(dims, rng);
  const SamplePoint& anchor = history.back().point;
  for (std::size_t attempt = 0; attempt < cfg.retries; ++attempt) {
    SamplePoint p;
    p.coords.resize(dims);
    for (std::size_t i = 0; i < dims; ++i) {
      const double lo = std::max(0.0, anchor[i] - cfg.radius);
      const double hi = std::min(1.0, anchor[i] + cfg.radius);
      p.coords[i] = rng.uniform(lo, hi);
    }
    if (kd.empty() || kd.nearest(p.coords).distance > cfg.novelty) return p;
  }
  return random_next(dims, rng);
}

}  // namespace advtest::sampling
