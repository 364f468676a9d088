#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "advtest/error.hpp"
#include "advtest/harness/controller.hpp"
#include "advtest/harness/protocol.hpp"
#include "advtest/harness/track.hpp"
#include "advtest/harness/vehicle.hpp"
#include "advtest/harness/visibility.hpp"
#include "advtest/json_io.hpp"
#include "advtest/rng.hpp"
#include "advtest/scenario/environment.hpp"
#include "advtest/scoring/scoring.hpp"
#include "advtest/sdl/agent_spec.hpp"
#include "advtest/sdl/sampler_spec.hpp"

namespace advtest::harness {

/// Rules of the built-in world. Distances in metres, times in seconds.
namespace world {
inline constexpr double kTargetSpeed = control::kCruise;
inline constexpr double kDurationSlack = 20;
inline constexpr double kMinDuration = 30;
inline constexpr double kMaxDuration = 60;
inline constexpr double kSensorRange = 60;
inline constexpr double kLaneHalfWidth = 1.75;     // off_lane beyond this
inline constexpr double kRoadHalfWidth = 3.5;      // off_road beyond this
inline constexpr double kRouteDeviation = 8.0;     // route_deviation beyond this
inline constexpr double kTunnelWall = 2.5;         // static collision beyond this inside a tunnel
inline constexpr double kLightTrigger = 40;        // light turns red when the ego is this close
inline constexpr double kLightRed = 6;             // seconds of red
inline constexpr double kStopZone = 8;             // a full stop must happen this close before the sign
inline constexpr double kStopHold = 1;             // seconds stationary to clear a stop sign
inline constexpr double kStationary = 0.05;        // m/s
inline constexpr double kTimeoutAfter = 3;         // seconds stationary with no reason
inline constexpr double kExcuseGap = 15;           // an obstacle this close excuses standing still
inline constexpr double kExcuseLine = 10;          // a demanding stop line this close excuses it too
inline constexpr double kCrossTrigger = 35;        // crossers start moving when the ego is this close
inline constexpr double kEndTolerance = 1;         // R snaps to 1 this close to the region end
inline constexpr std::int64_t kGraceSteps = 20;
}  // namespace world

/// Scene length from the region's length at the target speed plus slack,
/// clamped to [30, 60] s.
inline double scene_duration(double region_length) {
  return std::clamp(region_length / world::kTargetSpeed + world::kDurationSlack, world::kMinDuration,
                    world::kMaxDuration);
}

struct SceneOptions {
  double record_frequency_hz = 5;
  scoring::WeightTable weights = scoring::default_weights();
  scoring::MetricMask metrics = scoring::all_metrics_enabled();
  sdl::ScoreMode score = sdl::ScoreMode::Composite;
  std::vector<sdl::SensorSpec> sensors;  // observation fields offered to external controllers
};

/// Landmarks of `region`, as arc offsets from the region start.
inline std::vector<Landmark> region_landmarks(const Track& track, std::int64_t region) {
  std::vector<Landmark> out;
  const double begin = track.region_begin(region);
  const double len = track.region_length(region);
  for (const auto& l : track.landmarks()) {
    const double off = track.forward(begin, l.s);
    if (off < len) out.push_back({l.kind, off, l.extent});
  }
  std::sort(out.begin(), out.end(), [](const Landmark& a, const Landmark& b) { return a.s < b.s; });
  return out;
}

/// Whether the scene contains anything a controller must react to.
inline bool hazard_exists(const scenario::EnvironmentConditions& env, const Track& track, std::int64_t region) {
  if (env.traffic_density >= 1 || env.pedestrian_density >= 1) return true;
  for (const auto& l : region_landmarks(track, region))
    if (l.kind == LandmarkKind::TrafficLight || l.kind == LandmarkKind::StopSign) return true;
  return false;
}

namespace detail {

enum class ActorKind { Vehicle, Pedestrian };

/// Scripted road user in region coordinates (arc offset, lateral offset).
struct Actor {
  ActorKind kind;
  double s;
  double lat;
  double speed = 0;  // along the lane
  double length;
  double width;
  // Lead vehicle script.
  bool lead = false;
  double brake_at = 0;
  int phase = 0;
  double timer = 0;
  // Crossing script.
  double trigger_s = 0;
  double cross_speed = 0;
  double stand = 0;
  bool gone = false;
};

inline double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2 * std::numbers::pi);
  if (a < 0) a += 2 * std::numbers::pi;
  return a - std::numbers::pi;
}

inline void advance(Actor& a, double ego_s, double dt) {
  if (a.gone) return;
  if (a.lead) {
    constexpr double kBrake = 6, kResume = 2, kStop = 5;
    switch (a.phase) {
      case 0:
        if (a.s >= a.brake_at) a.phase = 1;
        break;
      case 1:
        a.speed = std::max(0.0, a.speed - kBrake * dt);
        if (a.speed == 0) {
          a.phase = 2;
          a.timer = 0;
        }
        break;
      case 2:
        a.timer += dt;
        if (a.timer >= kStop) a.phase = 3;
        break;
      case 3:
        a.speed = std::min(world::kTargetSpeed, a.speed + kResume * dt);
        break;
    }
    a.s += a.speed * dt;
    return;
  }
  // Crosser: waits at the kerb, walks to the lane centre, stands, walks off.
  switch (a.phase) {
    case 0:
      if (ego_s >= a.trigger_s) a.phase = 1;
      break;
    case 1:
      a.lat = std::max(0.0, a.lat - a.cross_speed * dt);
      if (a.lat == 0) {
        a.phase = 2;
        a.timer = 0;
      }
      break;
    case 2:
      a.timer += dt;
      if (a.timer >= a.stand) a.phase = 3;
      break;
    case 3:
      a.lat -= a.cross_speed * dt;
      if (a.lat < -5) a.gone = true;
      break;
  }
}

struct StopLine {
  std::int32_t id;
  bool light;
  double s;
  double red_since = -1;  // lights
  bool triggered = false;
  bool stopped = false;  // stop signs: a full stop happened in the zone
  double held = 0;
  bool cleared = false;

  bool demands(double t) const {
    if (light) return triggered && t - red_since < world::kLightRed;
    return !cleared;
  }
};

inline ojson observation_json(const std::vector<sdl::SensorSpec>& sensors, std::int64_t tick,
                              const VehicleState& ego, const Observation& o, ojson& held) {
  auto refresh = [&](const sdl::SensorSpec& s) {
    const auto period = std::max<std::int64_t>(1, std::llround(kTickRate / s.rate_hz));
    return tick % period == 0;
  };
  auto num = [](double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); };
  for (const auto& s : sensors) {
    if (!refresh(s)) continue;
    if (s.kind == "speedometer") held["speed"] = ego.speed;
    if (s.kind == "gnss") {
      held["x"] = ego.x;
      held["y"] = ego.y;
    }
    if (s.kind == "imu") held["heading"] = ego.heading;
    if (s.kind == "camera") {
      held["lateral"] = o.lateral;
      held["heading_error"] = o.heading_error;
      held["curvature"] = o.curvature;
      held["visibility"] = o.visibility;
      held["stop_distance"] = num(o.stop_distance);
    }
    if (s.kind == "lidar" || s.kind == "radar") {
      held["hazard_distance"] = num(o.hazard_distance);
      held["hazard_speed"] = std::isfinite(o.hazard_distance) ? ojson(o.hazard_speed) : ojson(nullptr);
    }
  }
  ojson obs = ojson{{"t", static_cast<double>(tick) * kDt}};
  for (auto it = held.begin(); it != held.end(); ++it) obs[it.key()] = it.value();
  return obs;
}

}  // namespace detail

/**
 * Execute one scene: drive region `scene.region_index` of `track` at 20 Hz
 * until the region end, a collision, a timeout, a route deviation, or the
 * scene duration. Hazards are placed from `rng_seed`; controller randomness
 * uses an independent stream derived from it.
 */
inline scoring::SceneResult run_scene(const scenario::SceneInstance& scene, const Track& track,
                                      const ControllerHandle& controller, std::uint64_t rng_seed,
                                      const SceneOptions& opt = {}) {
  using scoring::InfractionKind;
  if (scene.region_index < 0 || scene.region_index >= track.region_count())
    throw ValidationError("scene region " + std::to_string(scene.region_index) + " not on track " + track.name());
  if (!(opt.record_frequency_hz > 0)) throw ValidationError("record frequency must be positive");

  const auto& env = scene.environment;
  const std::int64_t region = scene.region_index;
  const double begin = track.region_begin(region);
  const double length = track.region_length(region);
  const auto landmarks = region_landmarks(track, region);
  const VehicleParams vp;

  Rng world_rng(derive_seed(rng_seed, 1));
  std::vector<detail::Actor> actors;
  if (env.traffic_density >= 1) {
    detail::Actor lead{detail::ActorKind::Vehicle, 0, 0, world::kTargetSpeed, vp.length, vp.width};
    lead.lead = true;
    lead.s = vp.length + world_rng.uniform(12, 25);
    lead.brake_at = world_rng.uniform(0.3, 0.6) * length;
    actors.push_back(lead);
  }
  const auto pedestrians = static_cast<std::int64_t>(std::llround(std::max(0.0, env.pedestrian_density)));
  for (std::int64_t i = 0; i < pedestrians; ++i) {
    detail::Actor p{detail::ActorKind::Pedestrian, world_rng.uniform(0.25, 0.85) * length, 4.0, 0, 0.5, 0.5};
    p.trigger_s = p.s - world::kCrossTrigger;
    p.cross_speed = 1.5;
    p.stand = 6;
    actors.push_back(p);
  }
  std::vector<detail::StopLine> lines;
  std::vector<std::pair<double, double>> tunnels;
  for (const auto& l : landmarks) {
    const auto id = static_cast<std::int32_t>(lines.size());
    if (l.kind == LandmarkKind::TrafficLight) lines.push_back({id, true, l.s});
    if (l.kind == LandmarkKind::StopSign) lines.push_back({id, false, l.s});
    if (l.kind == LandmarkKind::Tunnel) tunnels.emplace_back(l.s, l.s + l.extent);
    if (l.kind == LandmarkKind::Roundabout && env.traffic_density >= 2) {
      detail::Actor m{detail::ActorKind::Vehicle, l.s, 6.0, 0, vp.length, vp.width};
      m.trigger_s = l.s - world::kCrossTrigger;
      m.cross_speed = 3.0;
      m.stand = 4;
      actors.push_back(m);
    }
  }

  std::optional<SyntheticController> synthetic;
  std::unique_ptr<ExternalController> external;
  scoring::SceneResult result;
  result.scene_id = scene.scene_id;
  try {
    if (const auto* p = std::get_if<SyntheticControllerProfile>(&controller))
      synthetic.emplace(*p, derive_seed(rng_seed, 2));
    else {
      const auto& ep = std::get<ExternalEndpoint>(controller);
      external = std::make_unique<ExternalController>(ep.command, opt.sensors, ep.timeout_s);
    }
  } catch (const ProtocolError& e) {
    result.status = scoring::SceneStatus::ProtocolError;
    result.detail = e.what();
    return result;
  }

  VehicleState ego;
  {
    const Vec2 p = track.point_at(begin);
    ego.x = p.x;
    ego.y = p.y;
    ego.heading = track.heading_at(begin);
    ego.speed = world::kTargetSpeed;
  }
  std::ptrdiff_t hint = -1;
  auto locate = [&](Frenet& f) {
    f = track.project({ego.x, ego.y}, hint);
    hint = static_cast<std::ptrdiff_t>(f.segment);
    double local = track.forward(begin, f.s);
    if (track.closed() && local > length + 0.5 * (track.length() - length)) local -= track.length();
    return local;
  };

  Frenet fr;
  double s = locate(fr);
  double route = 0;
  bool off_lane = false, off_road = false;
  double stationary = 0;
  ojson held = ojson::object();

  const auto steps = static_cast<std::int64_t>(std::llround(scene.duration_s * kTickRate));
  const auto record_every = std::max<std::int64_t>(1, std::llround(kTickRate / opt.record_frequency_hz));
  auto record = [&](std::int64_t tick) {
    result.trajectory.push_back({static_cast<double>(tick) * kDt, ego.x, ego.y, ego.heading, ego.speed});
  };
  auto in_tunnel = [&](double at) {
    for (const auto& [a, b] : tunnels)
      if (at >= a && at <= b) return true;
    return false;
  };

  std::int64_t tick = 0;
  bool done = false;
  for (; tick < steps && !done; ++tick) {
    const double t = static_cast<double>(tick) * kDt;
    if (tick % record_every == 0) record(tick);

    // Light phases for this tick.
    for (auto& l : lines)
      if (l.light && !l.triggered && s >= l.s - world::kLightTrigger) {
        l.triggered = true;
        l.red_since = t;
      }

    Observation o;
    const bool tunnel = in_tunnel(s);
    o.visibility = effective_visibility(env, tunnel);
    o.speed = ego.speed;
    o.lateral = fr.lateral;
    o.heading_error = detail::wrap_angle(ego.heading - track.heading_at(fr.s));
    o.curvature =
        detail::wrap_angle(track.heading_at(fr.s + control::kLookahead) - track.heading_at(fr.s)) / control::kLookahead;
    o.in_tunnel = tunnel;
    o.time_of_day = env.time_of_day;
    o.progress = route;
    const double half = 0.5 * vp.length;
    for (const auto& a : actors) {
      if (a.gone) continue;
      const double ds = a.s - s;
      if (ds <= 0 || std::fabs(a.lat - fr.lateral) >= 0.5 * (vp.width + a.width)) continue;
      const double gap = ds - 0.5 * (vp.length + a.length);
      if (gap <= world::kSensorRange && gap < o.hazard_distance) {
        o.hazard_distance = gap;
        o.hazard_speed = a.speed;
      }
    }
    for (const auto& l : lines) {
      const double d = l.s - (s + half);
      if (d < -half || d > world::kSensorRange || !l.demands(t)) continue;
      if (d < o.stop_distance) {
        o.stop_distance = std::max(0.0, d);
        o.stop_id = l.id;
        o.stop_is_light = l.light;
      }
    }

    Controls c;
    try {
      if (synthetic)
        c = synthetic->act(o);
      else
        c = external->exchange(tick, detail::observation_json(opt.sensors, tick, ego, o, held));
      ego = step(ego, c, kDt, vp);
    } catch (const ProtocolError& e) {
      result.status = scoring::SceneStatus::ProtocolError;
      result.detail = e.what();
      result.infractions = {};
      break;
    }
    if (!std::isfinite(ego.x) || !std::isfinite(ego.y) || !std::isfinite(ego.heading) || !std::isfinite(ego.speed)) {
      result.status = scoring::SceneStatus::Diverged;
      result.detail = "non-finite vehicle state at tick " + std::to_string(tick);
      break;
    }
    for (auto& a : actors) detail::advance(a, s, kDt);

    const double prev_s = s;
    s = locate(fr);
    const double lat = std::fabs(fr.lateral);
    auto& inf = result.infractions;

    // Stop lines crossed this tick.
    for (auto& l : lines) {
      if (!l.light && !l.stopped && ego.speed < 0.1 && s < l.s && s >= l.s - world::kStopZone) l.stopped = true;
      if (!l.light && l.stopped && !l.cleared) {
        if (ego.speed < 0.1) l.held += kDt;
        if (l.held >= world::kStopHold || s >= l.s) l.cleared = true;
      }
      if (prev_s < l.s && s >= l.s) {
        if (l.light && l.demands(t)) ++inf[InfractionKind::RedLight];
        if (!l.light && !l.stopped) ++inf[InfractionKind::StopSign];
        if (!l.light) l.cleared = true;
      }
    }

    if (lat > world::kLaneHalfWidth && !off_lane) {
      off_lane = true;
      ++inf[InfractionKind::OffLane];
    } else if (lat < world::kLaneHalfWidth - 0.25) {
      off_lane = false;
    }
    if (lat > world::kRoadHalfWidth && !off_road) {
      off_road = true;
      ++inf[InfractionKind::OffRoad];
    } else if (lat < world::kRoadHalfWidth - 0.25) {
      off_road = false;
    }
    if (lat > world::kRouteDeviation) {
      ++inf[InfractionKind::RouteDeviation];
      done = true;
    }

    bool collided = false;
    if (in_tunnel(s) && lat > world::kTunnelWall) {
      ++inf[InfractionKind::CollisionStatic];
      collided = true;
    }
    for (const auto& a : actors) {
      if (a.gone || collided) continue;
      if (std::fabs(a.s - s) < 0.5 * (vp.length + a.length) && std::fabs(a.lat - fr.lateral) < 0.5 * (vp.width + a.width)) {
        ++inf[a.kind == detail::ActorKind::Pedestrian ? InfractionKind::CollisionPedestrian
                                                      : InfractionKind::CollisionVehicle];
        collided = true;
      }
    }
    if (collided) {
      if (std::fabs(detail::wrap_angle(ego.heading - track.heading_at(fr.s))) > std::numbers::pi / 2)
        ++inf[InfractionKind::Timeout];
      done = true;
    }

    route = std::max(route, std::clamp(s / length, 0.0, 1.0));
    if (length - s <= world::kEndTolerance) {
      route = 1;
      done = true;
    }

    if (!done) {
      if (ego.speed < world::kStationary) {
        bool excused = false;
        for (const auto& a : actors) {
          const double ds = a.s - s;
          if (!a.gone && ds > 0 && ds - 0.5 * (vp.length + a.length) <= world::kExcuseGap &&
              std::fabs(a.lat - fr.lateral) < 0.5 * (vp.width + a.width) + 0.5)
            excused = true;
        }
        for (const auto& l : lines)
          if (l.demands(t + kDt) && l.s - s >= 0 && l.s - s <= world::kExcuseLine) excused = true;
        stationary = excused ? 0 : stationary + kDt;
        if (stationary >= world::kTimeoutAfter - 1e-9) {
          ++inf[InfractionKind::Timeout];
          done = true;
        }
      } else {
        stationary = 0;
      }
    }
  }
  if (external) external->finish();
  record(tick);

  result.route_completion = route;
  result.wall_time_s = static_cast<double>(tick) * kDt;
  if (result.status == scoring::SceneStatus::Completed) {
    result.infractions = result.infractions.masked(opt.metrics);
    const double is = scoring::weighted_score(result.infractions, opt.weights);
    result.test_score = opt.score == sdl::ScoreMode::Composite ? scoring::composite_score(route, is) : is;
  } else {
    result.infractions = {};
    result.test_score = 0;
  }
  return result;
}

}  // namespace advtest::harness
