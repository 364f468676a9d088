#pragma once

// Guided Bayesian optimization: Halton cold start, then the expected
// improvement maximizer over random candidates restricted to a constraint box.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "advtest/rng.hpp"
#include "advtest/sampling/acquisition.hpp"
#include "advtest/sampling/feedback.hpp"
#include "advtest/sampling/gp.hpp"
#include "advtest/sampling/passive.hpp"

namespace advtest::sampling {

struct GboConfig {
  std::size_t cold_start = 10;
  double length_scale = 0.2;
  double signal_variance = 1.0;
  double noise = 1e-4;
  std::size_t candidates = 1024;
};

inline SamplePoint gbo_next(std::size_t dims, std::span<const SamplerFeedback> history, Rng& rng,
                            const GboConfig& cfg, const std::optional<Box>& constraint_region = std::nullopt) {
  const Box box = (constraint_region ? *constraint_region : Box::unit(dims)).clipped();
  if (history.size() < cfg.cold_start || history.empty()) {
    // Space-filling start, mapped into the admissible box.
    SamplePoint p = halton_next(dims, history.size() + 1);
    for (std::size_t i = 0; i < dims; ++i) p.coords[i] = box.low[i] + p.coords[i] * (box.high[i] - box.low[i]);
    return p;
  }

  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  xs.reserve(history.size());
  ys.reserve(history.size());
  for (const auto& f : history) {
    xs.push_back(f.point.coords);
    ys.push_back(f.test_score);
  }
  const double incumbent = *std::max_element(ys.begin(), ys.end());
  const GpSurrogate gp(std::move(xs), std::move(ys),
                       KernelConfig{{cfg.length_scale}, cfg.signal_variance, cfg.noise, 0.0});

  SamplePoint best;
  double best_ei = -1;
  std::vector<double> x(dims);
  for (std::size_t c = 0; c < cfg.candidates; ++c) {
    for (std::size_t i = 0; i < dims; ++i) x[i] = rng.uniform(box.low[i], box.high[i]);
    const double ei = expected_improvement(gp, x, incumbent);
    if (ei > best_ei) {
      best_ei = ei;
      best.coords = x;
    }
  }
  return best;
}

}  // namespace advtest::sampling
