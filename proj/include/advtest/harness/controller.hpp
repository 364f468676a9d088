#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "advtest/error.hpp"
#include "advtest/harness/vehicle.hpp"
#include "advtest/rng.hpp"

namespace advtest::harness {

/// Behaviour envelope of a built-in controller.
struct SyntheticControllerProfile {
  std::string name = "custom";
  double visibility_tolerance = 0;  // hazards are seen only when v >= this
  std::int32_t reaction_steps = 0;  // perception delay in ticks
  double red_light_miss_prob_at_dusk = 0;
  double tunnel_fragility = 0;  // chance of losing the lane inside a tunnel
  double stall_prob = 0;        // chance of an unprompted hard stop per scene
  bool operator==(const SyntheticControllerProfile&) const = default;

  void validate() const {
    auto unit = [](double v, const char* what) {
      if (!(v >= 0 && v <= 1)) throw ValidationError(std::string(what) + " must lie in [0,1]");
    };
    unit(visibility_tolerance, "visibility_tolerance");
    unit(red_light_miss_prob_at_dusk, "red_light_miss_prob_at_dusk");
    unit(tunnel_fragility, "tunnel_fragility");
    unit(stall_prob, "stall_prob");
    if (reaction_steps < 0) throw ValidationError("reaction_steps must be non-negative");
  }
};

inline constexpr std::array<std::string_view, 4> kPresetNames = {"robust", "fragile", "lbc_like", "transfuser_like"};

/// Named presets. lbc_like is weather/lighting/tunnel sensitive; transfuser_like
/// copes with weather but stalls.
inline std::optional<SyntheticControllerProfile> preset(std::string_view name) {
  if (name == "robust") return SyntheticControllerProfile{"robust", 0.0, 0, 0.0, 0.0, 0.0};
  if (name == "fragile") return SyntheticControllerProfile{"fragile", 0.7, 0, 0.0, 0.0, 0.0};
  if (name == "lbc_like") return SyntheticControllerProfile{"lbc_like", 0.5, 2, 0.3, 0.6, 0.0};
  if (name == "transfuser_like") return SyntheticControllerProfile{"transfuser_like", 0.15, 3, 0.2, 0.0, 0.35};
  return std::nullopt;
}

/// External controller process speaking the tick protocol over stdio.
struct ExternalEndpoint {
  std::string command;
  double timeout_s = 1.0;
  bool operator==(const ExternalEndpoint&) const = default;
};

using ControllerHandle = std::variant<SyntheticControllerProfile, ExternalEndpoint>;

inline std::string controller_name(const ControllerHandle& h) {
  if (const auto* p = std::get_if<SyntheticControllerProfile>(&h)) return p->name;
  return "external";
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// What a built-in controller gets to look at each tick. Hazard and stop-line
/// fields are ground truth; the controller decides what it actually sees.
struct Observation {
  double visibility = 1;
  double speed = 0;
  double lateral = 0;        // offset from lane centre, m, left positive
  double heading_error = 0;  // vehicle heading minus lane heading, rad
  double curvature = 0;      // lane curvature ahead, 1/m
  double hazard_distance = kInfinity;  // bumper gap to the nearest obstacle in the lane ahead
  double hazard_speed = 0;
  double stop_distance = kInfinity;  // distance to a stop line that currently demands a stop
  std::int32_t stop_id = -1;
  bool stop_is_light = false;
  bool in_tunnel = false;
  double time_of_day = 90;
  double progress = 0;  // fraction of the region driven
};

namespace control {

inline constexpr double kCruise = 8.0;           // m/s
inline constexpr double kComfortDecel = 3.0;     // m/s^2
inline constexpr double kStandoff = 4.0;         // m kept behind obstacles
inline constexpr double kEmergencyGap = 6.0;     // m
inline constexpr double kLookahead = 8.0;        // m
inline constexpr double kDuskAltitude = 15.0;    // |d| at or below this is dusk
inline constexpr double kSpeedGain = 2.0;

inline bool dusk(double time_of_day) { return std::fabs(time_of_day) <= kDuskAltitude; }

/// Speed and lane keeping given what the controller believes. `lane_target`
/// shifts the tracked lateral position.
inline Controls drive(const Observation& o, bool see_hazard, bool see_stop, double lane_target = 0,
                      const VehicleParams& vp = {}) {
  double v_des = kCruise;
  bool emergency = false;
  if (see_hazard && std::isfinite(o.hazard_distance)) {
    const double room = std::max(0.0, o.hazard_distance - kStandoff);
    v_des = std::min(v_des, std::sqrt(o.hazard_speed * o.hazard_speed + 2.0 * kComfortDecel * room));
    if (room <= 0) v_des = 0;
    emergency = o.hazard_distance <= kEmergencyGap && o.speed > o.hazard_speed;
  }
  if (see_stop && std::isfinite(o.stop_distance))
    v_des = std::min(v_des, std::sqrt(2.0 * kComfortDecel * std::max(0.0, o.stop_distance - 1.0)));

  Controls c;
  const double a = kSpeedGain * (v_des - o.speed);
  c.throttle = std::clamp(a / vp.max_accel, 0.0, 1.0);
  c.brake = std::clamp(-a / vp.max_decel, 0.0, 1.0);
  if (emergency || (v_des == 0 && o.speed < 0.5)) {
    c.throttle = 0;
    c.brake = 1;
  }

  const double bearing = std::atan2(lane_target - o.lateral, kLookahead) - o.heading_error;
  const double angle = std::atan(vp.wheelbase * o.curvature) + bearing;
  c.steer = std::clamp(angle / vp.max_steer, -1.0, 1.0);
  return c;
}

}  // namespace control

/// Stateless decision rule: hazards are seen when v >= tolerance; red lights
/// at dusk are missed with the profile's probability (one draw from `rng`).
inline Controls synthetic_control(const SyntheticControllerProfile& p, const Observation& o, Rng& rng) {
  const bool sees = o.visibility >= p.visibility_tolerance;
  bool see_stop = sees;
  if (sees && o.stop_is_light && std::isfinite(o.stop_distance) && control::dusk(o.time_of_day) &&
      rng.bernoulli(p.red_light_miss_prob_at_dusk))
    see_stop = false;
  return control::drive(o, sees, see_stop);
}

/**
 * Stateful built-in controller for one scene. Scene-level draws (stall,
 * tunnel fragility) are taken at construction in a fixed order; red-light
 * misses are drawn once per light. Perceived hazard and stop-line readings
 * are delayed by reaction_steps ticks; lane keeping is not.
 */
class SyntheticController {
 public:
  SyntheticController(SyntheticControllerProfile profile, std::uint64_t seed) : p_(std::move(profile)), rng_(seed) {
    p_.validate();
    will_stall_ = rng_.bernoulli(p_.stall_prob);
    stall_at_ = 0.2 + 0.5 * rng_.uniform();
    tunnel_drift_ = rng_.bernoulli(p_.tunnel_fragility);
  }

  const SyntheticControllerProfile& profile() const { return p_; }
  bool will_stall() const { return will_stall_; }
  bool tunnel_drift() const { return tunnel_drift_; }

  Controls act(const Observation& now) {
    if (stalled_ || (will_stall_ && now.progress >= stall_at_)) {
      stalled_ = true;
      return {0.0, 1.0, 0.0};
    }
    history_.push_back(now);
    while (history_.size() > static_cast<std::size_t>(p_.reaction_steps) + 1) history_.pop_front();
    Observation o = now;
    if (history_.size() == static_cast<std::size_t>(p_.reaction_steps) + 1) {
      const Observation& old = history_.front();
      o.hazard_distance = old.hazard_distance;
      o.hazard_speed = old.hazard_speed;
      o.stop_distance = old.stop_distance;
      o.stop_id = old.stop_id;
      o.stop_is_light = old.stop_is_light;
    } else {
      o.hazard_distance = kInfinity;
      o.stop_distance = kInfinity;
      o.stop_id = -1;
    }

    const bool sees = now.visibility >= p_.visibility_tolerance;
    bool see_stop = sees;
    if (sees && o.stop_is_light && o.stop_id >= 0 && std::isfinite(o.stop_distance) && control::dusk(o.time_of_day)) {
      auto it = missed_.find(o.stop_id);
      if (it == missed_.end()) it = missed_.emplace(o.stop_id, rng_.bernoulli(p_.red_light_miss_prob_at_dusk)).first;
      if (it->second) see_stop = false;
    }

    if (tunnel_drift_ && now.in_tunnel) lane_target_ += kDriftRate * kDt;
    return control::drive(o, sees, see_stop, lane_target_);
  }

 private:
  static constexpr double kDriftRate = 1.0;  // m/s of lateral drift once lost

  SyntheticControllerProfile p_;
  Rng rng_;
  bool will_stall_ = false;
  double stall_at_ = 1;
  bool tunnel_drift_ = false;
  bool stalled_ = false;
  double lane_target_ = 0;
  std::deque<Observation> history_;
  std::map<std::int32_t, bool> missed_;
};

}  // namespace advtest::harness
