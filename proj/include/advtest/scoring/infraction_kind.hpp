#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace advtest::scoring {

enum class InfractionKind : std::size_t {
  CollisionPedestrian,
  CollisionVehicle,
  CollisionStatic,
  RedLight,
  StopSign,
  RouteDeviation,
  OffLane,
  OffRoad,
  Timeout,
};

inline constexpr std::size_t kInfractionKinds = 9;

inline constexpr std::array<InfractionKind, kInfractionKinds> kAllInfractionKinds = {
    InfractionKind::CollisionPedestrian, InfractionKind::CollisionVehicle, InfractionKind::CollisionStatic,
    InfractionKind::RedLight,            InfractionKind::StopSign,         InfractionKind::RouteDeviation,
    InfractionKind::OffLane,             InfractionKind::OffRoad,          InfractionKind::Timeout,
};

inline constexpr std::array<std::string_view, kInfractionKinds> kInfractionNames = {
    "collision_pedestrian", "collision_vehicle", "collision_static", "red_light", "stop_sign",
    "route_deviation",      "off_lane",          "off_road",         "timeout",
};

constexpr std::size_t index(InfractionKind k) { return static_cast<std::size_t>(k); }
constexpr std::string_view name(InfractionKind k) { return kInfractionNames[index(k)]; }

inline std::optional<InfractionKind> kind_from_name(std::string_view n) {
  for (std::size_t i = 0; i < kInfractionKinds; ++i)
    if (kInfractionNames[i] == n) return static_cast<InfractionKind>(i);
  return std::nullopt;
}

constexpr bool is_collision(InfractionKind k) {
  return k == InfractionKind::CollisionPedestrian || k == InfractionKind::CollisionVehicle ||
         k == InfractionKind::CollisionStatic;
}

/// Per-kind on/off switches; every kind is enabled by default.
using MetricMask = std::array<bool, kInfractionKinds>;

inline constexpr MetricMask all_metrics_enabled() {
  MetricMask m{};
  for (auto& b : m) b = true;
  return m;
}

}  // namespace advtest::scoring
