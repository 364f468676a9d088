#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advtest/error.hpp"
#include "advtest/scoring/infraction_kind.hpp"

namespace advtest::scoring {

/// Count of each infraction kind in one scene.
struct InfractionRecord {
  std::array<std::uint32_t, kInfractionKinds> counts{};

  std::uint32_t operator[](InfractionKind k) const { return counts[index(k)]; }
  std::uint32_t& operator[](InfractionKind k) { return counts[index(k)]; }

  /// I_C: vehicle, pedestrian and static collisions together.
  std::uint32_t collisions() const {
    return (*this)[InfractionKind::CollisionPedestrian] + (*this)[InfractionKind::CollisionVehicle] +
           (*this)[InfractionKind::CollisionStatic];
  }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  /// Zero the kinds that are switched off.
  InfractionRecord masked(const MetricMask& enabled) const {
    InfractionRecord r = *this;
    for (std::size_t i = 0; i < kInfractionKinds; ++i)
      if (!enabled[i]) r.counts[i] = 0;
    return r;
  }
  bool operator==(const InfractionRecord&) const = default;
};

/// Non-negative weight per infraction kind.
struct WeightTable {
  std::array<double, kInfractionKinds> weights{};

  double operator[](InfractionKind k) const { return weights[index(k)]; }
  double& operator[](InfractionKind k) { return weights[index(k)]; }
  bool operator==(const WeightTable&) const = default;

  void validate() const {
    for (std::size_t i = 0; i < kInfractionKinds; ++i)
      if (!(weights[i] >= 0) || !std::isfinite(weights[i]))
        throw ValidationError("weight for " + std::string(kInfractionNames[i]) + " must be finite and non-negative");
  }
};

/// Penalty coefficients in the spirit of the public driving-challenge table.
/// Configuration, not ground truth; reports print the table in force.
inline WeightTable default_weights() {
  WeightTable w;
  w[InfractionKind::CollisionPedestrian] = 0.50;
  w[InfractionKind::CollisionVehicle] = 0.60;
  w[InfractionKind::CollisionStatic] = 0.65;
  w[InfractionKind::RedLight] = 0.70;
  w[InfractionKind::StopSign] = 0.80;
  w[InfractionKind::RouteDeviation] = 0.70;
  w[InfractionKind::OffLane] = 0.30;
  w[InfractionKind::OffRoad] = 0.30;
  w[InfractionKind::Timeout] = 0.70;
  return w;
}

/// How a scene execution ended.
enum class SceneStatus { Completed, ProtocolError, Diverged };

inline std::string to_string(SceneStatus s) {
  switch (s) {
    case SceneStatus::Completed: return "completed";
    case SceneStatus::ProtocolError: return "protocol_error";
    case SceneStatus::Diverged: return "diverged";
  }
  return "completed";
}

inline SceneStatus status_from_string(const std::string& s) {
  if (s == "completed") return SceneStatus::Completed;
  if (s == "protocol_error") return SceneStatus::ProtocolError;
  if (s == "diverged") return SceneStatus::Diverged;
  throw Error("unknown scene status '" + s + "'");
}

struct TrajectorySample {
  double t;
  double x;
  double y;
  double heading;
  double speed;
  bool operator==(const TrajectorySample&) const = default;
};

struct SceneResult {
  std::int64_t scene_id = 0;
  InfractionRecord infractions;
  double route_completion = 0;  // R in [0,1]
  double test_score = 0;        // TS >= 0
  double wall_time_s = 0;
  SceneStatus status = SceneStatus::Completed;
  std::string detail;  // abort reason, if any
  std::vector<TrajectorySample> trajectory;
  bool operator==(const SceneResult&) const = default;

  bool valid() const { return status == SceneStatus::Completed; }
};

/// TS = sum_k w_k * I_k.
inline double weighted_score(const InfractionRecord& infractions, const WeightTable& weights) {
  double ts = 0;
  for (std::size_t i = 0; i < kInfractionKinds; ++i) ts += weights.weights[i] * infractions.counts[i];
  return ts;
}

/// TS = R * I_S with R the route-completion fraction and I_S the weighted sum.
inline double composite_score(double route_completion, double weighted_sum) {
  if (route_completion < 0 || route_completion > 1) throw Error("route completion must lie in [0,1]");
  return route_completion * weighted_sum;
}

inline constexpr double kCompletionTolerance = 1e-6;

/// Failure: any infraction, or the route not completed.
inline bool classify_failure(const SceneResult& r) {
  return r.infractions.total() > 0 || r.route_completion < 1.0 - kCompletionTolerance;
}

/// FT(%) = N_fail / N_total * 100.
inline double failed_test_rate(std::uint64_t n_fail, std::uint64_t n_total) {
  if (n_total == 0) throw Error("failed test rate of an empty ledger");
  return 100.0 * static_cast<double>(n_fail) / static_cast<double>(n_total);
}

/// FT over the valid results; invalid (aborted) scenes are not test cases.
inline double failed_test_rate(std::span<const SceneResult> results) {
  std::uint64_t fail = 0, total = 0;
  for (const auto& r : results) {
    if (!r.valid()) continue;
    ++total;
    fail += classify_failure(r);
  }
  return failed_test_rate(fail, total);
}

/// Scene time plus any recorded sampler overhead.
inline double total_execution_time(std::span<const double> scene_times, std::span<const double> overheads = {}) {
  double t = 0;
  for (double s : scene_times) t += s;
  for (double o : overheads) t += o;
  return t;
}

inline void to_json(nlohmann::json& j, const InfractionRecord& r) {
  j = nlohmann::json::object();
  for (std::size_t i = 0; i < kInfractionKinds; ++i) j[std::string(kInfractionNames[i])] = r.counts[i];
}

inline void from_json(const nlohmann::json& j, InfractionRecord& r) {
  for (std::size_t i = 0; i < kInfractionKinds; ++i) r.counts[i] = j.at(std::string(kInfractionNames[i])).get<std::uint32_t>();
}

inline void to_json(nlohmann::json& j, const WeightTable& w) {
  j = nlohmann::json::object();
  for (std::size_t i = 0; i < kInfractionKinds; ++i) j[std::string(kInfractionNames[i])] = w.weights[i];
}

inline void from_json(const nlohmann::json& j, WeightTable& w) {
  for (std::size_t i = 0; i < kInfractionKinds; ++i) w.weights[i] = j.at(std::string(kInfractionNames[i])).get<double>();
}

inline void to_json(nlohmann::json& j, const SceneResult& r) {
  nlohmann::json traj = nlohmann::json::array();
  for (const auto& s : r.trajectory) traj.push_back({s.t, s.x, s.y, s.heading, s.speed});
  j = nlohmann::json{{"scene_id", r.scene_id},
                     {"infractions", r.infractions},
                     {"route_completion", r.route_completion},
                     {"test_score", r.test_score},
                     {"wall_time_s", r.wall_time_s},
                     {"status", to_string(r.status)},
                     {"detail", r.detail},
                     {"trajectory", traj}};
}

inline void from_json(const nlohmann::json& j, SceneResult& r) {
  r.scene_id = j.at("scene_id").get<std::int64_t>();
  r.infractions = j.at("infractions").get<InfractionRecord>();
  r.route_completion = j.at("route_completion").get<double>();
  r.test_score = j.at("test_score").get<double>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.status = status_from_string(j.at("status").get<std::string>());
  r.detail = j.at("detail").get<std::string>();
  r.trajectory.clear();
  for (const auto& s : j.at("trajectory")) {
    if (!s.is_array() || s.size() != 5) throw Error("trajectory sample must hold 5 numbers");
    r.trajectory.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<double>(), s[3].get<double>(),
                            s[4].get<double>()});
  }
}

}  // namespace advtest::scoring
