#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "advtest/sampling/gp.hpp"

namespace advtest::sampling {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Expected improvement over `incumbent` for a maximization problem, from a
/// posterior mean and standard deviation.
inline double expected_improvement(double mean, double sigma, double incumbent) {
  const double gain = mean - incumbent;
  if (!(sigma > 1e-12)) return std::max(gain, 0.0);
  const double z = gain / sigma;
  return std::max(gain * normal_cdf(z) + sigma * normal_pdf(z), 0.0);
}

inline double expected_improvement(const GpSurrogate& gp, const std::vector<double>& x, double incumbent) {
  const auto p = gp.predict(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), incumbent);
}

}  // namespace advtest::sampling
