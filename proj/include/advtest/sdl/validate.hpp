#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "advtest/error.hpp"
#include "advtest/harness/controller.hpp"
#include "advtest/harness/track.hpp"
#include "advtest/harness/world.hpp"
#include "advtest/sampling/sampler.hpp"
#include "advtest/scenario/interpreter.hpp"
#include "advtest/sdl/agent_spec.hpp"
#include "advtest/sdl/sampler_spec.hpp"
#include "advtest/sdl/scene_spec.hpp"

namespace advtest::sdl {

enum class Severity { Warning, Error };

struct Finding {
  Severity severity = Severity::Warning;
  std::string code;
  std::string message;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool empty() const { return findings.empty(); }
  bool has_errors() const {
    return std::any_of(findings.begin(), findings.end(), [](const Finding& f) { return f.severity == Severity::Error; });
  }
  bool has(std::string_view code) const {
    return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; });
  }
};

inline std::string_view to_string(Severity s) { return s == Severity::Error ? "error" : "warning"; }

namespace detail {

/// Sensor kind that provides an observation field, or empty if none does.
inline std::string_view field_provider(std::string_view field) {
  if (field == "speed") return "speedometer";
  if (field == "x" || field == "y") return "gnss";
  if (field == "heading") return "imu";
  if (field == "lateral" || field == "heading_error" || field == "curvature" || field == "visibility" ||
      field == "stop_distance")
    return "camera";
  if (field == "hazard_distance" || field == "hazard_speed") return "lidar|radar";
  return {};
}

inline bool has_sensor(const AgentSpecification& a, std::string_view kind) {
  return std::any_of(a.sensors.begin(), a.sensors.end(), [&](const SensorSpec& s) { return s.kind == kind; });
}

}  // namespace detail

/**
 * Consistency checks across the three documents. Findings:
 *
 *   grid_budget_exceeds_grid   budget larger than resolution^D
 *   grid_not_exhaustive        exhaustive coverage asked with budget != r^D
 *   feedback_degenerate        rns/gbo cannot use feedback at this budget
 *   unknown_controller         not a preset and not `external` (error)
 *   external_without_endpoint  (error)
 *   unknown_track              town/track pair has no fixture (error)
 *   duration_cap               region may not be drivable within the scene cap
 *   channel_unprovided         recorded channel has no providing sensor
 */
inline ValidationReport validate_cross(const SceneSpecification& scene, const AgentSpecification& agent,
                                       const SamplerSpecification& sampler) {
  ValidationReport rep;
  const auto warn = [&](std::string code, std::string msg) {
    rep.findings.push_back({Severity::Warning, std::move(code), std::move(msg)});
  };
  const auto fail = [&](std::string code, std::string msg) {
    rep.findings.push_back({Severity::Error, std::move(code), std::move(msg)});
  };

  std::size_t dims = 0;
  try {
    dims = scenario::partition_parameters(scene).space.dimension();
  } catch (const Error& e) {
    fail("search_space", e.what());
  }

  if (sampler.sampler == SamplerKind::Grid && dims > 0) {
    const auto r = sampling::grid_resolution(sampler, dims);
    const auto cells = sampling::grid_size(r, dims);
    const auto budget = static_cast<std::uint64_t>(sampler.budget);
    const std::string lattice = std::to_string(r) + "^" + std::to_string(dims) + " = " + std::to_string(cells);
    if (budget > cells)
      warn("grid_budget_exceeds_grid",
           "budget " + std::to_string(budget) + " exceeds the grid size " + lattice + "; cells will repeat");
    if (sampler.option_or_default("grid.exhaustive") != 0 && budget != cells)
      warn("grid_not_exhaustive", "exhaustive coverage needs budget equal to " + lattice + ", got " +
                                      std::to_string(budget));
  }
  if (sampler.sampler == SamplerKind::Rns && sampler.budget <= 1)
    warn("feedback_degenerate", "rns with budget 1 receives no feedback and degenerates to random sampling");
  if (sampler.sampler == SamplerKind::Gbo) {
    const auto cold = static_cast<std::int64_t>(sampler.option_or_default("gbo.cold_start"));
    if (sampler.budget <= cold)
      warn("feedback_degenerate", "gbo budget " + std::to_string(sampler.budget) + " does not exceed cold_start " +
                                      std::to_string(cold) + "; every point is a random draw");
  }

  if (agent.controller == "external") {
    if (agent.endpoint.empty()) fail("external_without_endpoint", "controller external requires an endpoint");
  } else if (!harness::preset(agent.controller)) {
    std::string names;
    for (auto n : harness::kPresetNames) names += std::string(n) + ", ";
    fail("unknown_controller", "unknown controller '" + agent.controller + "'; available: " + names + "external");
  }

  try {
    const auto track = harness::make_track(scene.town, scene.track, scene.regions);
    for (std::int64_t r = 0; r < track.region_count(); ++r) {
      const double len = track.region_length(r);
      const double dur = harness::scene_duration(len);
      if (len / harness::world::kTargetSpeed > dur)
        warn("duration_cap", "region " + std::to_string(r) + " (" + format_double(std::round(len)) +
                                 " m) cannot be completed at cruise speed within " + format_double(dur) + " s");
    }
  } catch (const ValidationError& e) {
    fail("unknown_track", e.what());
  }

  for (const auto& ch : agent.recorded_channels) {
    if (ch == "t" || ch == "controls" || ch == "trajectory" || ch == "infractions") continue;
    if (std::find(kSensorKinds.begin(), kSensorKinds.end(), ch) != kSensorKinds.end()) {
      if (!detail::has_sensor(agent, ch)) warn("channel_unprovided", "recorded channel '" + ch + "' has no " + ch + " sensor");
      continue;
    }
    const auto provider = detail::field_provider(ch);
    if (provider.empty()) {
      warn("channel_unprovided", "recorded channel '" + ch + "' is not an observation field");
    } else if (provider == "lidar|radar" ? !(detail::has_sensor(agent, "lidar") || detail::has_sensor(agent, "radar"))
                                         : !detail::has_sensor(agent, provider)) {
      warn("channel_unprovided",
           "recorded channel '" + ch + "' needs a " + std::string(provider == "lidar|radar" ? "lidar or radar" : provider) +
               " sensor");
    }
  }
  return rep;
}

}  // namespace advtest::sdl
