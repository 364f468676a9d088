#pragma once

// Random specification documents for round-trip and fuzz tests.

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "advtest/rng.hpp"
#include "advtest/sdl/agent_spec.hpp"
#include "advtest/sdl/sampler_spec.hpp"
#include "advtest/sdl/scene_spec.hpp"

namespace specgen {

using advtest::Rng;
namespace sdl = advtest::sdl;

// Values with short decimal forms, like a person would type, plus the odd
// full-precision double.
inline double number(Rng& r, double lo, double hi) {
  const double v = r.uniform(lo, hi);
  switch (r.below(4)) {
    case 0: return std::round(v);
    case 1: return std::round(v * 4) / 4;
    case 2: return std::round(v * 1000) / 1000;
    default: return v;
  }
}

inline sdl::ParamValue param(Rng& r, double lo, double hi) {
  if (r.bernoulli(0.3)) return number(r, lo, hi);
  double a = number(r, lo, hi), b = number(r, lo, hi);
  if (a > b) std::swap(a, b);
  return sdl::Range{a, b};
}

inline std::string identifier(Rng& r, std::size_t max_len = 10) {
  static const std::string head = "abcdefghijklmnopqrstuvwxyz";
  static const std::string tail = "abcdefghijklmnopqrstuvwxyz0123456789_";
  std::string s(1, head[r.below(head.size())]);
  const auto n = r.below(max_len);
  for (std::uint64_t i = 0; i < n; ++i) s += tail[r.below(tail.size())];
  return s;
}

inline sdl::SceneSpecification scene(Rng& r) {
  sdl::SceneSpecification s;
  s.town = static_cast<std::int64_t>(r.below(10));
  s.track = static_cast<std::int64_t>(r.below(4));
  s.regions = 1 + static_cast<std::int64_t>(r.below(10));
  if (r.bernoulli(0.8)) s.weather.cloudiness = param(r, 0, 100);
  if (r.bernoulli(0.8)) s.weather.precipitation = param(r, 0, 100);
  if (r.bernoulli(0.8)) s.weather.time_of_day = param(r, -90, 90);
  if (r.bernoulli(0.6)) s.pedestrian_density = param(r, 0, 5);
  if (r.bernoulli(0.6)) s.traffic_density = param(r, 0, 50);
  s.per_region_sampling = r.bernoulli(0.5);
  if (r.bernoulli(0.3)) s.initial.cloudiness = number(r, 0, 100);
  if (r.bernoulli(0.3)) s.initial.time_of_day = number(r, -90, 90);
  if (r.bernoulli(0.3)) s.initial.traffic_density = std::round(number(r, 0, 50));
  if (r.bernoulli(0.5)) s.constraints.weather_delta = number(r, 0, 20);
  if (r.bernoulli(0.5)) s.constraints.traffic_delta = number(r, 0, 5);
  if (r.bernoulli(0.3)) s.constraints.pedestrian_delta = number(r, 0, 3);
  std::vector<std::string> names = {"infraction_penalty", "collisions", "off_road_driving", "off_lane_driving"};
  for (auto n : advtest::scoring::kInfractionNames) names.emplace_back(n);
  for (const auto& n : names)
    if (r.bernoulli(0.15)) s.infraction_metrics.switches.emplace_back(n, r.bernoulli(0.5));
  for (auto k : advtest::scoring::kAllInfractionKinds)
    if (r.bernoulli(0.15)) s.infraction_metrics.weights.emplace_back(k, number(r, 0, 2));
  if (r.bernoulli(0.7)) s.record_frequency_hz = number(r, 0.5, 40);
  return s;
}

inline sdl::AgentSpecification agent(Rng& r) {
  sdl::AgentSpecification a;
  a.controller = identifier(r);
  if (r.bernoulli(0.3)) {
    static const std::string chars = "abc XYZ./-_=:\"\\'0123456789";
    const auto n = 1 + r.below(20);
    for (std::uint64_t i = 0; i < n; ++i) a.endpoint += chars[r.below(chars.size())];
  }
  const auto sensors = r.below(4);
  for (std::uint64_t i = 0; i < sensors; ++i) {
    sdl::SensorSpec s;
    s.kind = std::string(sdl::kSensorKinds[r.below(sdl::kSensorKinds.size())]);
    if (r.bernoulli(0.7)) {
      const std::size_t n = r.bernoulli(0.5) ? 3 : 6;
      for (std::size_t k = 0; k < n; ++k) s.pose.push_back(number(r, -5, 5));
    }
    s.rate_hz = number(r, 1, 50);
    if (s.rate_hz <= 0) s.rate_hz = 1;
    a.sensors.push_back(s);
  }
  const auto channels = r.below(4);
  for (std::uint64_t i = 0; i < channels; ++i) a.recorded_channels.push_back(identifier(r));
  return a;
}

inline sdl::SamplerSpecification sampler(Rng& r) {
  sdl::SamplerSpecification s;
  s.sampler = static_cast<sdl::SamplerKind>(r.below(5));
  s.seed = r.next();
  s.budget = 1 + static_cast<std::int64_t>(r.below(100000));
  s.score = r.bernoulli(0.5) ? sdl::ScoreMode::Composite : sdl::ScoreMode::Weighted;
  for (const auto& o : sdl::kSamplerOptions) {
    if (o.sampler != s.sampler || !r.bernoulli(0.5)) continue;
    double v = 0;
    switch (o.type) {
      case sdl::OptionInfo::Type::Boolean: v = r.bernoulli(0.5) ? 1 : 0; break;
      case sdl::OptionInfo::Type::Integer: v = std::max(o.min, 1.0) + static_cast<double>(r.below(100)); break;
      case sdl::OptionInfo::Type::Real: {
        const double hi = std::min(o.max, 10.0);
        v = number(r, o.min, hi);
        if (o.min_exclusive && v <= o.min) v = hi;
        break;
      }
    }
    s.options.emplace_back(std::string(o.key), v);
  }
  return s;
}

/// Perturb the canonical rendering without changing its meaning: key case,
/// `-`/space for `_` in keys, comments, blank lines and indentation.
inline std::string restyle(const std::string& canonical, Rng& r) {
  std::string out;
  std::size_t pos = 0;
  while (pos < canonical.size()) {
    auto nl = canonical.find('\n', pos);
    if (nl == std::string::npos) nl = canonical.size();
    std::string line = canonical.substr(pos, nl - pos);
    pos = nl + 1;
    const auto start = line.find_first_not_of(' ');
    const auto colon = line.find(':');
    const auto brace = line.find(" {");
    std::size_t key_end = std::string::npos;
    if (colon != std::string::npos) key_end = colon;
    else if (brace != std::string::npos) key_end = brace;
    if (start != std::string::npos && key_end != std::string::npos && key_end > start) {
      for (std::size_t i = start; i < key_end; ++i) {
        char& c = line[i];
        if (c == '_' && line.find('.', start) >= key_end) {
          const auto choice = r.below(3);
          if (choice == 1) c = '-';
          if (choice == 2) c = ' ';
        } else if (std::isalpha(static_cast<unsigned char>(c)) && r.bernoulli(0.2)) {
          c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
      }
    }
    if (r.bernoulli(0.2)) line = std::string(r.below(4), ' ') + line;
    if (line.find('"') == std::string::npos && r.bernoulli(0.2)) line += "  // note " + std::to_string(r.below(100));
    out += line + "\n";
    if (r.bernoulli(0.1)) out += "\n";
  }
  return out;
}

}  // namespace specgen
