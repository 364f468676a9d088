#pragma once

#include <algorithm>
#include <cmath>

#include "advtest/scenario/environment.hpp"

namespace advtest::harness {

/// Light level from sun altitude d (degrees). Lowest at dusk (d = 0): 0.3.
/// Rises linearly to 1 at d = 30 and stays there; below the horizon it
/// rises to 0.5 at d = -30 (street lighting) and stays there.
inline double daylight(double d) {
  if (d >= 0) return 0.3 + 0.7 * std::min(1.0, d / 30.0);
  return 0.3 + 0.2 * std::min(1.0, -d / 30.0);
}

/// v = (1 - 0.6 p/100)(1 - 0.2 c/100) daylight(d), halved inside a tunnel.
inline double effective_visibility(const scenario::EnvironmentConditions& env, bool in_tunnel) {
  const double p = std::clamp(env.precipitation, 0.0, 100.0);
  const double c = std::clamp(env.cloudiness, 0.0, 100.0);
  const double v = (1.0 - 0.6 * p / 100.0) * (1.0 - 0.2 * c / 100.0) * daylight(env.time_of_day);
  return in_tunnel ? v * 0.5 : v;
}

}  // namespace advtest::harness
