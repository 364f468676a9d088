#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "advtest/scenario/interpreter.hpp"

namespace advtest::sampling {

using scenario::SamplePoint;

/// Outcome of one executed test case, as seen by an active sampler.
struct SamplerFeedback {
  SamplePoint point;
  double test_score = 0;
  bool failed = false;
  bool operator==(const SamplerFeedback&) const = default;
};

/// Axis-aligned box in normalized coordinates.
struct Box {
  std::vector<double> low;
  std::vector<double> high;

  static Box unit(std::size_t dims) { return {std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)}; }

  /// Intersection with [0,1]^D; an empty axis collapses to its nearest face.
  Box clipped() const {
    Box b = *this;
    for (std::size_t i = 0; i < b.low.size(); ++i) {
      b.low[i] = std::clamp(b.low[i], 0.0, 1.0);
      b.high[i] = std::clamp(b.high[i], 0.0, 1.0);
      if (b.high[i] < b.low[i]) b.high[i] = b.low[i];
    }
    return b;
  }
  bool contains(const SamplePoint& p) const {
    for (std::size_t i = 0; i < low.size(); ++i)
      if (p[i] < low[i] || p[i] > high[i]) return false;
    return true;
  }
  bool operator==(const Box&) const = default;
};

}  // namespace advtest::sampling
