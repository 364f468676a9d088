#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace advtest::scenario {

/// Canonical parameter order; search-space dimensions follow it.
enum class Param : std::size_t { Cloudiness, Precipitation, TimeOfDay, TrafficDensity, PedestrianDensity };

inline constexpr std::size_t kParamCount = 5;

inline constexpr std::array<Param, kParamCount> kAllParams = {
    Param::Cloudiness, Param::Precipitation, Param::TimeOfDay, Param::TrafficDensity, Param::PedestrianDensity};

inline constexpr std::array<std::string_view, kParamCount> kParamNames = {
    "cloudiness", "precipitation", "time_of_day", "traffic_density", "pedestrian_density"};

constexpr std::string_view name(Param p) { return kParamNames[static_cast<std::size_t>(p)]; }

inline std::optional<Param> param_from_name(std::string_view n) {
  for (std::size_t i = 0; i < kParamCount; ++i)
    if (kParamNames[i] == n) return static_cast<Param>(i);
  return std::nullopt;
}

/// Traffic and pedestrians are counts; the weather parameters are continuous.
constexpr bool is_count(Param p) { return p == Param::TrafficDensity || p == Param::PedestrianDensity; }
constexpr bool is_weather(Param p) { return !is_count(p); }

/// Physical bounds: percent for cloud/rain, sun angle in degrees, counts >= 0.
struct PhysicalRange {
  double low;
  double high;
};

constexpr PhysicalRange physical_range(Param p) {
  switch (p) {
    case Param::Cloudiness:
    case Param::Precipitation:
      return {0.0, 100.0};
    case Param::TimeOfDay:
      return {-90.0, 90.0};
    case Param::TrafficDensity:
    case Param::PedestrianDensity:
      return {0.0, std::numeric_limits<double>::infinity()};
  }
  return {0.0, 0.0};
}

/// Temporal scene variables of one region.
struct EnvironmentConditions {
  double cloudiness = 0;          // percent
  double precipitation = 0;       // percent
  double time_of_day = 0;         // sun altitude, degrees; 0 is dusk
  double traffic_density = 0;     // vehicles
  double pedestrian_density = 0;  // crossing pedestrians

  double get(Param p) const {
    switch (p) {
      case Param::Cloudiness: return cloudiness;
      case Param::Precipitation: return precipitation;
      case Param::TimeOfDay: return time_of_day;
      case Param::TrafficDensity: return traffic_density;
      case Param::PedestrianDensity: return pedestrian_density;
    }
    return 0;
  }
  void set(Param p, double v) {
    switch (p) {
      case Param::Cloudiness: cloudiness = v; break;
      case Param::Precipitation: precipitation = v; break;
      case Param::TimeOfDay: time_of_day = v; break;
      case Param::TrafficDensity: traffic_density = v; break;
      case Param::PedestrianDensity: pedestrian_density = v; break;
    }
  }
  bool operator==(const EnvironmentConditions&) const = default;
};

inline void to_json(nlohmann::json& j, const EnvironmentConditions& e) {
  j = nlohmann::json::object();
  for (auto p : kAllParams) j[std::string(name(p))] = e.get(p);
}

inline void from_json(const nlohmann::json& j, EnvironmentConditions& e) {
  for (auto p : kAllParams) e.set(p, j.at(std::string(name(p))).get<double>());
}

/// Literal (non-sampled) parameters in canonical order.
using FixedParams = std::vector<std::pair<std::string, double>>;

/// One executable test case: a single region traversal under one environment.
struct SceneInstance {
  std::int64_t scene_id = 0;
  std::int64_t region_index = 0;
  EnvironmentConditions environment;
  FixedParams fixed;
  double duration_s = 30.0;
  bool operator==(const SceneInstance&) const = default;
};

/// Scene artifact schema: {scene_id, region, environment{...}, duration_s, fixed{...}}.
inline void to_json(nlohmann::json& j, const SceneInstance& s) {
  nlohmann::json fixed = nlohmann::json::object();
  for (const auto& [k, v] : s.fixed) fixed[k] = v;
  j = nlohmann::json{{"scene_id", s.scene_id},
                     {"region", s.region_index},
                     {"environment", s.environment},
                     {"duration_s", s.duration_s},
                     {"fixed", fixed}};
}

inline void from_json(const nlohmann::json& j, SceneInstance& s) {
  s.scene_id = j.at("scene_id").get<std::int64_t>();
  s.region_index = j.at("region").get<std::int64_t>();
  s.environment = j.at("environment").get<EnvironmentConditions>();
  s.duration_s = j.at("duration_s").get<double>();
  s.fixed.clear();
  // nlohmann objects iterate in key order; restore canonical parameter order.
  const auto& f = j.at("fixed");
  for (auto p : kAllParams)
    if (auto it = f.find(std::string(name(p))); it != f.end()) s.fixed.emplace_back(std::string(name(p)), it->get<double>());
  for (auto it = f.begin(); it != f.end(); ++it)
    if (!param_from_name(it.key())) s.fixed.emplace_back(it.key(), it->get<double>());
}

}  // namespace advtest::scenario
