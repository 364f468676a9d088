#pragma once

#include <algorithm>
#include <cmath>

#include "advtest/error.hpp"

namespace advtest::harness {

inline constexpr double kTickRate = 20.0;
inline constexpr double kDt = 1.0 / kTickRate;

struct VehicleParams {
  double wheelbase = 2.8;       // m
  double max_steer = 0.6;       // rad
  double max_accel = 3.0;       // m/s^2 at full throttle
  double max_decel = 8.0;       // m/s^2 at full brake
  double length = 4.5;          // m
  double width = 1.8;           // m
};

struct VehicleState {
  double x = 0;
  double y = 0;
  double heading = 0;   // rad
  double speed = 0;     // m/s, >= 0
  double steering = 0;  // rad
  bool operator==(const VehicleState&) const = default;
};

/// Throttle and brake in [0,1]; steer in [-1,1] as a fraction of max_steer.
struct Controls {
  double throttle = 0;
  double brake = 0;
  double steer = 0;
  bool operator==(const Controls&) const = default;
};

/// Kinematic bicycle, one fixed step. Position advances along the mean
/// heading of the step so constant steering traces a true circle.
inline VehicleState step(const VehicleState& s, const Controls& c, double dt = kDt, const VehicleParams& p = {}) {
  if (!std::isfinite(c.throttle) || !std::isfinite(c.brake) || !std::isfinite(c.steer))
    throw SimulationError("non-finite controls");
  if (!(dt > 0) || !std::isfinite(dt)) throw SimulationError("time step must be positive");
  const double throttle = std::clamp(c.throttle, 0.0, 1.0);
  const double brake = std::clamp(c.brake, 0.0, 1.0);
  const double steer = std::clamp(c.steer, -1.0, 1.0) * p.max_steer;

  VehicleState n = s;
  n.steering = steer;
  const double dh = s.speed / p.wheelbase * std::tan(steer) * dt;
  const double mid = s.heading + 0.5 * dh;
  n.x = s.x + s.speed * std::cos(mid) * dt;
  n.y = s.y + s.speed * std::sin(mid) * dt;
  n.heading = s.heading + dh;
  const double accel = throttle * p.max_accel - brake * p.max_decel;
  n.speed = std::max(0.0, s.speed + accel * dt);
  return n;
}

}  // namespace advtest::harness
