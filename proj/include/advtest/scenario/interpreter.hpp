#pragma once

// Interpreter between the scene specification and the samplers: splits
// parameters into sampled and fixed, maps unit-cube points onto the declared
// ranges, and enforces the per-region rate-of-change limits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "advtest/error.hpp"
#include "advtest/scenario/environment.hpp"
#include "advtest/sdl/scene_spec.hpp"
#include "advtest/text.hpp"

namespace advtest::scenario {

enum class DimKind { Continuous, Integer };

struct Dim {
  std::string name;
  Param param;
  double low;
  double high;
  DimKind kind;
  bool operator==(const Dim&) const = default;
};

/// A point of the unit hypercube [0,1]^D.
struct SamplePoint {
  std::vector<double> coords;

  std::size_t size() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
  bool operator==(const SamplePoint&) const = default;
};

struct SearchSpace {
  std::vector<Dim> dims;
  std::int64_t region_count = 1;

  std::size_t dimension() const { return dims.size(); }
  bool operator==(const SearchSpace&) const = default;

  /// Affine map from [0,1] to [low, high]; no rounding.
  double denormalize(std::size_t i, double x) const { return dims[i].low + x * (dims[i].high - dims[i].low); }
  double normalize(std::size_t i, double v) const { return (v - dims[i].low) / (dims[i].high - dims[i].low); }

  std::vector<double> denormalize(const SamplePoint& p) const {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = denormalize(i, p[i]);
    return out;
  }
  /// Normalized coordinates of the sampled parameters of `env`.
  SamplePoint normalize(const EnvironmentConditions& env) const {
    SamplePoint p;
    p.coords.reserve(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) p.coords.push_back(normalize(i, env.get(dims[i].param)));
    return p;
  }
};

/// Round half to even, independent of the floating-point environment.
inline double round_half_even(double x) {
  const double r = std::round(x);
  if (std::fabs(x - std::trunc(x)) == 0.5) return 2.0 * std::round(x / 2.0);
  return r;
}

inline const std::optional<sdl::ParamValue>& declared(const sdl::SceneSpecification& s, Param p) {
  switch (p) {
    case Param::Cloudiness: return s.weather.cloudiness;
    case Param::Precipitation: return s.weather.precipitation;
    case Param::TimeOfDay: return s.weather.time_of_day;
    case Param::TrafficDensity: return s.traffic_density;
    case Param::PedestrianDensity: return s.pedestrian_density;
  }
  return s.traffic_density;
}

inline std::string spec_path(Param p) {
  return is_weather(p) ? "weather." + std::string(name(p)) : std::string(name(p));
}

/// Campaign starting conditions: d = 0 (dusk), c = 0, p = 0, t = 5,
/// no pedestrians, unless overridden in the `initial` block. An override must
/// lie inside the parameter's declared range (or equal its literal).
inline EnvironmentConditions initial_conditions(const sdl::SceneSpecification& spec) {
  EnvironmentConditions env{0.0, 0.0, 0.0, 5.0, 0.0};
  const auto& i = spec.initial;
  const std::optional<double>* overrides[kParamCount] = {&i.cloudiness, &i.precipitation, &i.time_of_day,
                                                         &i.traffic_density, &i.pedestrian_density};
  for (auto p : kAllParams) {
    const auto& o = *overrides[static_cast<std::size_t>(p)];
    if (!o) continue;
    const double v = *o;
    const auto phys = physical_range(p);
    double lo = phys.low, hi = phys.high;
    if (const auto& d = declared(spec, p)) {
      if (const auto* r = std::get_if<sdl::Range>(&*d)) {
        lo = r->low;
        hi = r->high;
      } else {
        lo = hi = std::get<double>(*d);
      }
    }
    if (v < lo || v > hi || v < phys.low || v > phys.high) {
      const std::string key = "initial." + std::string(name(p));
      throw SemanticError(spec.locations.at(key), key,
                          "initial value " + format_double(v) + " outside declared range [" + format_double(lo) + "," +
                              format_double(hi) + "]");
    }
    env.set(p, v);
  }
  return env;
}

struct Partition {
  SearchSpace space;
  FixedParams fixed;
};

/// Ranges with low < high become dimensions (canonical order); literals and
/// degenerate ranges become fixed values; omitted parameters take their
/// initial condition. Throws ValidationError when nothing is left to sample.
inline Partition partition_parameters(const sdl::SceneSpecification& spec) {
  Partition out;
  out.space.region_count = spec.regions;
  const EnvironmentConditions init = initial_conditions(spec);
  for (auto p : kAllParams) {
    const auto& d = declared(spec, p);
    const auto phys = physical_range(p);
    const std::string key = spec_path(p);
    if (d && std::holds_alternative<sdl::Range>(*d)) {
      const auto r = std::get<sdl::Range>(*d);
      if (r.low < phys.low || r.high > phys.high)
        throw SemanticError(spec.locations.at(key), key,
                            "range [" + format_double(r.low) + "," + format_double(r.high) +
                                "] exceeds physical bounds");
      if (r.low < r.high) {
        out.space.dims.push_back(
            {std::string(name(p)), p, r.low, r.high, is_count(p) ? DimKind::Integer : DimKind::Continuous});
        continue;
      }
      out.fixed.emplace_back(std::string(name(p)), r.low);
    } else if (d) {
      const double v = std::get<double>(*d);
      if (v < phys.low || v > phys.high)
        throw SemanticError(spec.locations.at(key), key, "value " + format_double(v) + " outside physical bounds");
      out.fixed.emplace_back(std::string(name(p)), v);
    } else {
      out.fixed.emplace_back(std::string(name(p)), init.get(p));
    }
  }
  if (out.space.dims.empty())
    throw ValidationError("scene specification declares no sampled parameters; nothing to search");
  return out;
}

namespace detail {

/// Clamp `candidate` into [prev - delta, prev + delta] such that the
/// difference computed in floating point never exceeds delta.
inline double clamp_toward(double prev, double candidate, double delta) {
  if (!std::isfinite(delta)) return candidate;
  double v = candidate;
  if (v > prev + delta) v = prev + delta;
  if (v < prev - delta) v = prev - delta;
  while (std::fabs(v - prev) > delta) v = std::nextafter(v, prev);
  return v;
}

}  // namespace detail

/// Per-field rate limiting against the previous region. Weather fields use
/// weather_delta; counts use their own delta, floored to a whole number when
/// the previous count is whole so results stay integral.
inline EnvironmentConditions apply_constraints(const EnvironmentConditions& prev, const EnvironmentConditions& candidate,
                                               const sdl::ConstraintSet& c) {
  EnvironmentConditions out = candidate;
  for (auto p : kAllParams) {
    double delta = c.weather_delta;
    if (p == Param::TrafficDensity) delta = c.traffic_delta;
    if (p == Param::PedestrianDensity) delta = c.pedestrian_delta;
    const double pv = prev.get(p);
    if (is_count(p) && std::isfinite(delta) && pv == std::floor(pv)) delta = std::floor(delta);
    out.set(p, detail::clamp_toward(pv, candidate.get(p), delta));
  }
  return out;
}

/// Denormalize, round count dimensions, merge fixed values, then rate-limit
/// against `prev` when given (the first region of a traversal has none).
inline SceneInstance materialize_scene(const SamplePoint& point, const SearchSpace& space, const FixedParams& fixed,
                                       std::int64_t region, const std::optional<EnvironmentConditions>& prev,
                                       const sdl::ConstraintSet& constraints, std::int64_t scene_id = 0,
                                       double duration_s = 30.0) {
  if (point.size() != space.dimension()) throw ValidationError("sample point dimension does not match search space");
  SceneInstance scene;
  scene.scene_id = scene_id;
  scene.region_index = region;
  scene.fixed = fixed;
  scene.duration_s = duration_s;
  for (const auto& [k, v] : fixed)
    if (auto p = param_from_name(k)) scene.environment.set(*p, v);
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto& d = space.dims[i];
    double v = space.denormalize(i, std::clamp(point[i], 0.0, 1.0));
    if (d.kind == DimKind::Integer) v = round_half_even(v);
    scene.environment.set(d.param, std::clamp(v, d.low, d.high));
  }
  if (prev) scene.environment = apply_constraints(*prev, scene.environment, constraints);
  return scene;
}

}  // namespace advtest::scenario
