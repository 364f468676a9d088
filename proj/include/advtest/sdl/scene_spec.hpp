#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "advtest/error.hpp"
#include "advtest/scoring/infraction_kind.hpp"
#include "advtest/sdl/document.hpp"
#include "advtest/text.hpp"

namespace advtest::sdl {

/// A scene parameter is either fixed (literal) or sampled from a uniform range.
using ParamValue = std::variant<double, Range>;

/// Field path -> position of its value in the source. Ignored by equality.
struct SourceMap {
  std::map<std::string, SourcePos> positions;

  bool operator==(const SourceMap&) const { return true; }

  SourcePos at(const std::string& key) const {
    auto it = positions.find(key);
    return it == positions.end() ? SourcePos{} : it->second;
  }
};

struct WeatherSpec {
  std::optional<ParamValue> cloudiness;
  std::optional<ParamValue> precipitation;
  std::optional<ParamValue> time_of_day;
  bool operator==(const WeatherSpec&) const = default;
};

/// Maximum change per region transition, in parameter units. +inf = unconstrained.
struct ConstraintSet {
  double weather_delta = std::numeric_limits<double>::infinity();
  double traffic_delta = std::numeric_limits<double>::infinity();
  double pedestrian_delta = std::numeric_limits<double>::infinity();
  bool operator==(const ConstraintSet&) const = default;
};

struct InitialOverrides {
  std::optional<double> cloudiness;
  std::optional<double> precipitation;
  std::optional<double> time_of_day;
  std::optional<double> traffic_density;
  std::optional<double> pedestrian_density;
  bool operator==(const InitialOverrides&) const = default;
};

/// Metric switches resolve left to right over an all-enabled mask.
///
///   infraction_penalty  collisions, red_light, stop_sign, timeout
///   collisions          the three collision kinds
///   off_road_driving    off_road
///   off_lane_driving    off_lane
///   <kind name>         that kind alone
struct InfractionMetrics {
  std::vector<std::pair<std::string, bool>> switches;
  std::vector<std::pair<scoring::InfractionKind, double>> weights;
  bool operator==(const InfractionMetrics&) const = default;

  scoring::MetricMask enabled() const;
};

struct SceneSpecification {
  std::int64_t town = 0;
  std::int64_t track = 0;
  std::int64_t regions = 1;
  WeatherSpec weather;
  std::optional<ParamValue> pedestrian_density;
  std::optional<ParamValue> traffic_density;
  bool per_region_sampling = false;
  InitialOverrides initial;
  ConstraintSet constraints;
  InfractionMetrics infraction_metrics;
  double record_frequency_hz = 5.0;
  SourceMap locations;

  bool operator==(const SceneSpecification&) const = default;
};

namespace detail {

inline std::vector<scoring::InfractionKind> switch_targets(std::string_view name) {
  using K = scoring::InfractionKind;
  if (name == "infraction_penalty")
    return {K::CollisionPedestrian, K::CollisionVehicle, K::CollisionStatic, K::RedLight, K::StopSign, K::Timeout};
  if (name == "collisions") return {K::CollisionPedestrian, K::CollisionVehicle, K::CollisionStatic};
  if (name == "off_road_driving") return {K::OffRoad};
  if (name == "off_lane_driving") return {K::OffLane};
  if (auto k = scoring::kind_from_name(name)) return {*k};
  return {};
}

inline const BlockSchema& scene_body_schema() {
  static const BlockSchema schema = [] {
    static BlockSchema weather;
    weather.properties = {{"cloudiness", {DType::Parameter}},
                          {"precipitation", {DType::Parameter}},
                          {"time_of_day", {DType::Parameter}}};
    static BlockSchema constraints;
    constraints.properties = {{"weather_delta", {DType::Scalar}},
                              {"traffic_delta", {DType::Scalar}},
                              {"pedestrian_delta", {DType::Scalar}}};
    static BlockSchema initial;
    initial.properties = {{"cloudiness", {DType::Scalar}},       {"precipitation", {DType::Scalar}},
                          {"time_of_day", {DType::Scalar}},      {"traffic_density", {DType::Scalar}},
                          {"pedestrian_density", {DType::Scalar}}};
    static BlockSchema weights;
    for (auto n : scoring::kInfractionNames) weights.properties[std::string(n)] = {DType::Scalar};
    static BlockSchema metrics;
    for (auto n : {"infraction_penalty", "collisions", "off_road_driving", "off_lane_driving"})
      metrics.properties[n] = {DType::Boolean};
    for (auto n : scoring::kInfractionNames) metrics.properties[std::string(n)] = {DType::Boolean};
    metrics.children = {{"weights", &weights}};

    BlockSchema body;
    body.properties = {{"town", {DType::Integer}},
                       {"track", {DType::Integer}},
                       {"regions", {DType::Integer}},
                       {"pedestrian_density", {DType::Parameter}},
                       {"traffic_density", {DType::Parameter}},
                       {"per_region_sampling", {DType::Boolean}},
                       {"record_frequency", {DType::Scalar, "Hz"}}};
    body.children = {{"weather", &weather},
                     {"constraints", &constraints},
                     {"initial", &initial},
                     {"infraction_metrics", &metrics}};
    return body;
  }();
  return schema;
}

/// Root accepting either the bare body or the body wrapped in `wrapper { }`.
inline BlockSchema wrapped_root(const BlockSchema& body, const std::string& wrapper) {
  BlockSchema root = body;
  root.children[wrapper] = &body;
  return root;
}

inline const Entity& unwrap(const Entity& doc, const std::string& wrapper) {
  if (const Entity* w = doc.child(wrapper)) {
    if (!doc.properties.empty() || doc.children.size() != 1)
      throw SemanticError(w->pos, wrapper, "content outside the '" + wrapper + "' block");
    return *w;
  }
  return doc;
}

template <class T>
const T& get(const Property& p) {
  return std::get<T>(p.value);
}

inline ParamValue as_param(const Property& p) {
  if (std::holds_alternative<Range>(p.value)) return get<Range>(p);
  return get<double>(p);
}

inline std::string format_param(const ParamValue& v) {
  if (const auto* r = std::get_if<Range>(&v))
    return "[" + format_double(r->low) + "," + format_double(r->high) + "]";
  return format_double(std::get<double>(v));
}

}  // namespace detail

inline scoring::MetricMask InfractionMetrics::enabled() const {
  auto mask = scoring::all_metrics_enabled();
  for (const auto& [name, on] : switches)
    for (auto k : detail::switch_targets(name)) mask[scoring::index(k)] = on;
  return mask;
}

/**
 * Parse a scene specification. Accepts the concrete syntax shown below, with
 * the outer `Scenario Description { }` wrapper optional:
 *
 *     Scenario Description{
 *         town: 5
 *         track: 1
 *         regions: 5
 *         weather:
 *           cloudiness: [0,100]
 *           precipitation: [0,100]
 *           time-of-day: [-90,90]
 *         pedestrian_density: [0,3]
 *         traffic_density: [0,10]
 *         Constraints:
 *             weather_delta: 2
 *         Infraction_Metrics:
 *             Route Deviation: false
 *         Record Frequency: 5Hz }
 *
 * Defaults: regions 1, record frequency 5 Hz, every metric enabled, deltas
 * unconstrained, per-region sampling off. `town` and `track` are required.
 */
inline SceneSpecification parse_scene_spec(std::string_view text) {
  static const BlockSchema root = detail::wrapped_root(detail::scene_body_schema(), "scenario_description");
  const Entity doc = parse_document(text, root);
  const Entity& body = detail::unwrap(doc, "scenario_description");

  SceneSpecification spec;
  auto& loc = spec.locations.positions;
  const auto remember = [&](const std::string& key, const Property& p) { loc[key] = p.value_pos; };

  const auto required_int = [&](const char* key) {
    const Property* p = body.find(key);
    if (!p) throw SemanticError(body.pos, key, "required field missing");
    remember(key, *p);
    return detail::get<std::int64_t>(*p);
  };
  spec.town = required_int("town");
  spec.track = required_int("track");
  if (spec.town < 0) throw SemanticError(loc["town"], "town", "must be non-negative");
  if (spec.track < 0) throw SemanticError(loc["track"], "track", "must be non-negative");

  if (const Property* p = body.find("regions")) {
    remember("regions", *p);
    spec.regions = detail::get<std::int64_t>(*p);
    if (spec.regions < 1) throw SemanticError(p->value_pos, "regions", "must be at least 1");
  }

  const auto param = [&](const Entity& e, const char* key, const std::string& path) -> std::optional<ParamValue> {
    const Property* p = e.find(key);
    if (!p) return std::nullopt;
    remember(path, *p);
    return detail::as_param(*p);
  };
  if (const Entity* w = body.child("weather")) {
    spec.weather.cloudiness = param(*w, "cloudiness", "weather.cloudiness");
    spec.weather.precipitation = param(*w, "precipitation", "weather.precipitation");
    spec.weather.time_of_day = param(*w, "time_of_day", "weather.time_of_day");
  }
  spec.pedestrian_density = param(body, "pedestrian_density", "pedestrian_density");
  spec.traffic_density = param(body, "traffic_density", "traffic_density");

  if (const Property* p = body.find("per_region_sampling")) {
    remember("per_region_sampling", *p);
    spec.per_region_sampling = detail::get<bool>(*p);
  }

  if (const Entity* c = body.child("constraints")) {
    const auto delta = [&](const char* key, double& out) {
      const Property* p = c->find(key);
      if (!p) return;
      remember(std::string("constraints.") + key, *p);
      out = detail::get<double>(*p);
      if (out < 0) throw SemanticError(p->value_pos, key, "delta must be non-negative");
    };
    delta("weather_delta", spec.constraints.weather_delta);
    delta("traffic_delta", spec.constraints.traffic_delta);
    delta("pedestrian_delta", spec.constraints.pedestrian_delta);
  }

  if (const Entity* i = body.child("initial")) {
    const auto value = [&](const char* key, std::optional<double>& out) {
      if (const Property* p = i->find(key)) {
        remember(std::string("initial.") + key, *p);
        out = detail::get<double>(*p);
      }
    };
    value("cloudiness", spec.initial.cloudiness);
    value("precipitation", spec.initial.precipitation);
    value("time_of_day", spec.initial.time_of_day);
    value("traffic_density", spec.initial.traffic_density);
    value("pedestrian_density", spec.initial.pedestrian_density);
  }

  if (const Entity* m = body.child("infraction_metrics")) {
    for (const auto& p : m->properties) {
      remember("infraction_metrics." + p.name, p);
      spec.infraction_metrics.switches.emplace_back(p.name, detail::get<bool>(p));
    }
    if (const Entity* w = m->child("weights")) {
      for (const auto& p : w->properties) {
        remember("infraction_metrics.weights." + p.name, p);
        const double v = detail::get<double>(p);
        if (v < 0) throw SemanticError(p.value_pos, p.name, "weight must be non-negative");
        spec.infraction_metrics.weights.emplace_back(*scoring::kind_from_name(p.name), v);
      }
    }
  }

  if (const Property* p = body.find("record_frequency")) {
    remember("record_frequency", *p);
    spec.record_frequency_hz = detail::get<double>(*p);
    if (!(spec.record_frequency_hz > 0))
      throw SemanticError(p->value_pos, "record_frequency", "must be positive");
  }
  return spec;
}

/// Canonical, byte-stable rendering: declaration order, two-space indent,
/// one space after each colon, unconstrained deltas omitted.
inline std::string serialize(const SceneSpecification& s) {
  std::ostringstream out;
  out << "scenario_description {\n";
  out << "  town: " << s.town << "\n";
  out << "  track: " << s.track << "\n";
  out << "  regions: " << s.regions << "\n";
  const auto& w = s.weather;
  if (w.cloudiness || w.precipitation || w.time_of_day) {
    out << "  weather {\n";
    if (w.cloudiness) out << "    cloudiness: " << detail::format_param(*w.cloudiness) << "\n";
    if (w.precipitation) out << "    precipitation: " << detail::format_param(*w.precipitation) << "\n";
    if (w.time_of_day) out << "    time_of_day: " << detail::format_param(*w.time_of_day) << "\n";
    out << "  }\n";
  }
  if (s.pedestrian_density) out << "  pedestrian_density: " << detail::format_param(*s.pedestrian_density) << "\n";
  if (s.traffic_density) out << "  traffic_density: " << detail::format_param(*s.traffic_density) << "\n";
  out << "  per_region_sampling: " << (s.per_region_sampling ? "true" : "false") << "\n";
  const auto& i = s.initial;
  if (i.cloudiness || i.precipitation || i.time_of_day || i.traffic_density || i.pedestrian_density) {
    out << "  initial {\n";
    const auto line = [&](const char* k, const std::optional<double>& v) {
      if (v) out << "    " << k << ": " << format_double(*v) << "\n";
    };
    line("cloudiness", i.cloudiness);
    line("precipitation", i.precipitation);
    line("time_of_day", i.time_of_day);
    line("traffic_density", i.traffic_density);
    line("pedestrian_density", i.pedestrian_density);
    out << "  }\n";
  }
  const auto& c = s.constraints;
  if (std::isfinite(c.weather_delta) || std::isfinite(c.traffic_delta) || std::isfinite(c.pedestrian_delta)) {
    out << "  constraints {\n";
    if (std::isfinite(c.weather_delta)) out << "    weather_delta: " << format_double(c.weather_delta) << "\n";
    if (std::isfinite(c.traffic_delta)) out << "    traffic_delta: " << format_double(c.traffic_delta) << "\n";
    if (std::isfinite(c.pedestrian_delta))
      out << "    pedestrian_delta: " << format_double(c.pedestrian_delta) << "\n";
    out << "  }\n";
  }
  const auto& m = s.infraction_metrics;
  if (!m.switches.empty() || !m.weights.empty()) {
    out << "  infraction_metrics {\n";
    for (const auto& [name, on] : m.switches) out << "    " << name << ": " << (on ? "true" : "false") << "\n";
    if (!m.weights.empty()) {
      out << "    weights {\n";
      for (const auto& [kind, value] : m.weights)
        out << "      " << scoring::name(kind) << ": " << format_double(value) << "\n";
      out << "    }\n";
    }
    out << "  }\n";
  }
  out << "  record_frequency: " << format_double(s.record_frequency_hz) << "Hz\n";
  out << "}\n";
  return out.str();
}

}  // namespace advtest::sdl
