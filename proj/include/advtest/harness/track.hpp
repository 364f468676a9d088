#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "advtest/error.hpp"

namespace advtest::harness {

struct Vec2 {
  double x = 0;
  double y = 0;
  bool operator==(const Vec2&) const = default;
};

enum class LandmarkKind { TrafficLight, StopSign, Tunnel, Roundabout };

inline constexpr std::array<std::string_view, 4> kLandmarkNames = {"traffic_light", "stop_sign", "tunnel", "roundabout"};

constexpr std::string_view name(LandmarkKind k) { return kLandmarkNames[static_cast<std::size_t>(k)]; }

/// A landmark at arc position `s` (m along the centerline) covering `extent` m.
/// Point landmarks (lights, stop signs) have extent 0 and mark the stop line.
struct Landmark {
  LandmarkKind kind;
  double s;
  double extent = 0;
  bool operator==(const Landmark&) const = default;
};

/// Landmark placed in waypoint coordinates: u = k + f lies a fraction f of
/// the way from waypoint k to waypoint k+1.
struct LandmarkPlacement {
  LandmarkKind kind;
  double u;
  double extent_u = 0;
};

struct Frenet {
  double s = 0;        // arc position, [0, length) on closed tracks
  double lateral = 0;  // signed offset, positive to the left of travel
  std::size_t segment = 0;
};

/**
 * Polyline route through waypoints. The centerline is a uniform Catmull-Rom
 * spline through the waypoints sampled about every metre. Regions are
 * contiguous waypoint spans given by strictly increasing indices; region r
 * runs from waypoint bounds[r] to waypoint bounds[r+1] (mod count on closed
 * tracks).
 */
class Track {
 public:
  Track() = default;

  Track(std::string name, std::vector<Vec2> waypoints, bool closed, std::vector<std::size_t> region_bounds,
        std::vector<LandmarkPlacement> landmarks = {})
      : name_(std::move(name)), waypoints_(std::move(waypoints)), closed_(closed), bounds_(std::move(region_bounds)) {
    const std::size_t w = waypoints_.size();
    if (w < 2) throw ValidationError("track needs at least two waypoints");
    const std::size_t last = closed_ ? w : w - 1;
    if (bounds_.size() < 2 || bounds_.front() != 0 || bounds_.back() != last)
      throw ValidationError("region bounds must start at waypoint 0 and end at the final waypoint");
    for (std::size_t r = 0; r + 1 < bounds_.size(); ++r) {
      if (bounds_[r + 1] <= bounds_[r]) throw ValidationError("region bounds must be strictly increasing");
      if (closed_ && bounds_[r + 1] - bounds_[r] < 2) throw ValidationError("each region must contain two waypoints");
    }
    build_centerline();
    for (const auto& l : landmarks) {
      const double s0 = s_at_u(l.u);
      const double s1 = s_at_u(l.u + l.extent_u);
      double extent = s1 - s0;
      if (extent < 0) extent += length_;
      landmarks_.push_back({l.kind, s0, extent});
    }
  }

  const std::string& name() const { return name_; }
  const std::vector<Vec2>& waypoints() const { return waypoints_; }
  bool closed() const { return closed_; }
  double length() const { return length_; }
  std::int64_t region_count() const { return static_cast<std::int64_t>(bounds_.size()) - 1; }
  const std::vector<std::size_t>& region_bounds() const { return bounds_; }
  const std::vector<Landmark>& landmarks() const { return landmarks_; }
  const std::vector<Vec2>& centerline() const { return center_; }
  double waypoint_s(std::size_t k) const { return k >= waypoints_.size() ? length_ : wp_s_[k]; }

  double region_begin(std::int64_t r) const { return waypoint_s(bounds_.at(static_cast<std::size_t>(r))); }
  double region_end(std::int64_t r) const { return waypoint_s(bounds_.at(static_cast<std::size_t>(r) + 1)); }
  double region_length(std::int64_t r) const { return region_end(r) - region_begin(r); }

  /// Arc distance from `from` forward to `to`, wrapping on closed tracks.
  double forward(double from, double to) const {
    double d = to - from;
    if (closed_) {
      d = std::fmod(d, length_);
      if (d < 0) d += length_;
    }
    return d;
  }

  double wrap(double s) const {
    if (!closed_) return std::clamp(s, 0.0, length_);
    s = std::fmod(s, length_);
    return s < 0 ? s + length_ : s;
  }

  Vec2 point_at(double s) const {
    const auto [i, t] = locate(s);
    const Vec2& a = center_[i];
    const Vec2& b = center_[next(i)];
    return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  }

  double heading_at(double s) const {
    const auto [i, t] = locate(s);
    (void)t;
    const Vec2& a = center_[i];
    const Vec2& b = center_[next(i)];
    return std::atan2(b.y - a.y, b.x - a.x);
  }

  /// Point offset `lateral` m to the left of the centerline at `s`.
  Vec2 offset_point(double s, double lateral) const {
    const Vec2 p = point_at(s);
    const double h = heading_at(s);
    return {p.x - std::sin(h) * lateral, p.y + std::cos(h) * lateral};
  }

  /// Closest centerline point. With a hint only nearby segments are searched.
  Frenet project(const Vec2& p, std::ptrdiff_t hint = -1) const {
    const std::size_t n = segment_count();
    std::size_t first = 0, count = n;
    if (hint >= 0 && n > 2 * kWindow + 1) {
      first = (static_cast<std::size_t>(hint) + n - kWindow) % n;
      count = 2 * kWindow + 1;
      if (!closed_) {
        first = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, hint - static_cast<std::ptrdiff_t>(kWindow)));
        count = std::min(count, n - first);
      }
    }
    double best = std::numeric_limits<double>::infinity();
    Frenet out;
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = (first + k) % n;
      const Vec2& a = center_[i];
      const Vec2& b = center_[next(i)];
      const double dx = b.x - a.x, dy = b.y - a.y;
      const double len2 = dx * dx + dy * dy;
      double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
      t = std::clamp(t, 0.0, 1.0);
      const double qx = a.x + t * dx, qy = a.y + t * dy;
      const double d2 = (p.x - qx) * (p.x - qx) + (p.y - qy) * (p.y - qy);
      if (d2 < best) {
        best = d2;
        const double cross = dx * (p.y - a.y) - dy * (p.x - a.x);
        out.segment = i;
        out.s = arc_[i] + t * std::sqrt(len2);
        out.lateral = std::copysign(std::sqrt(d2), cross);
        if (d2 == 0) out.lateral = 0;
      }
    }
    if (closed_ && out.s >= length_) out.s -= length_;
    return out;
  }

 private:
  static constexpr std::size_t kWindow = 40;

  std::size_t segment_count() const { return closed_ ? center_.size() : center_.size() - 1; }
  std::size_t next(std::size_t i) const { return closed_ ? (i + 1) % center_.size() : std::min(i + 1, center_.size() - 1); }

  std::pair<std::size_t, double> locate(double s) const {
    s = wrap(s);
    const std::size_t n = segment_count();
    auto it = std::upper_bound(arc_.begin(), arc_.begin() + static_cast<std::ptrdiff_t>(n), s);
    std::size_t i = it == arc_.begin() ? 0 : static_cast<std::size_t>(it - arc_.begin()) - 1;
    i = std::min(i, n - 1);
    const double seg = arc_[i + 1] - arc_[i];
    return {i, seg > 0 ? std::clamp((s - arc_[i]) / seg, 0.0, 1.0) : 0.0};
  }

  double s_at_u(double u) const {
    const double w = static_cast<double>(waypoints_.size());
    if (closed_) {
      u = std::fmod(u, w);
      if (u < 0) u += w;
    } else {
      u = std::clamp(u, 0.0, w - 1);
    }
    const auto k = static_cast<std::size_t>(std::floor(u));
    const double f = u - static_cast<double>(k);
    return waypoint_s(k) + f * (waypoint_s(k + 1) - waypoint_s(k));
  }

  Vec2 waypoint(std::ptrdiff_t k) const {
    const auto w = static_cast<std::ptrdiff_t>(waypoints_.size());
    if (closed_) return waypoints_[static_cast<std::size_t>(((k % w) + w) % w)];
    return waypoints_[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, w - 1))];
  }

  void build_centerline() {
    const std::size_t w = waypoints_.size();
    const std::size_t spans = closed_ ? w : w - 1;
    center_.clear();
    std::vector<std::size_t> wp_index(w + 1, 0);
    for (std::size_t k = 0; k < spans; ++k) {
      const auto kk = static_cast<std::ptrdiff_t>(k);
      const Vec2 p0 = waypoint(kk - 1), p1 = waypoint(kk), p2 = waypoint(kk + 1), p3 = waypoint(kk + 2);
      const double chord = std::hypot(p2.x - p1.x, p2.y - p1.y);
      const auto pieces = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(chord)));
      wp_index[k] = center_.size();
      for (std::size_t j = 0; j < pieces; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(pieces);
        const double t2 = t * t, t3 = t2 * t;
        auto cr = [&](double a, double b, double c, double d) {
          return 0.5 * (2 * b + (-a + c) * t + (2 * a - 5 * b + 4 * c - d) * t2 + (-a + 3 * b - 3 * c + d) * t3);
        };
        center_.push_back({cr(p0.x, p1.x, p2.x, p3.x), cr(p0.y, p1.y, p2.y, p3.y)});
      }
    }
    if (!closed_) {
      wp_index[w - 1] = center_.size();
      center_.push_back(waypoints_.back());
    }
    const std::size_t n = segment_count();
    arc_.assign(center_.size() + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = center_[i];
      const Vec2& b = center_[next(i)];
      arc_[i + 1] = arc_[i] + std::hypot(b.x - a.x, b.y - a.y);
    }
    length_ = arc_[n];
    wp_s_.resize(w);
    for (std::size_t k = 0; k < w; ++k) wp_s_[k] = arc_[wp_index[k]];
  }

  std::string name_;
  std::vector<Vec2> waypoints_;
  bool closed_ = true;
  std::vector<std::size_t> bounds_;
  std::vector<Landmark> landmarks_;
  std::vector<Vec2> center_;
  std::vector<double> arc_;
  std::vector<double> wp_s_;
  double length_ = 0;
};

/// Evenly split `waypoints` into `regions` spans.
inline std::vector<std::size_t> even_region_bounds(std::size_t waypoints, std::int64_t regions, bool closed = true) {
  const std::size_t last = closed ? waypoints : waypoints - 1;
  if (regions < 1) throw ValidationError("region count must be at least 1");
  const auto r = static_cast<std::size_t>(regions);
  if (closed ? r * 2 > waypoints : r > last)
    throw ValidationError("track with " + std::to_string(waypoints) + " waypoints supports at most " +
                          std::to_string(closed ? waypoints / 2 : last) + " regions");
  std::vector<std::size_t> b(r + 1);
  for (std::size_t i = 0; i <= r; ++i) b[i] = (i * last + r / 2) / r;
  return b;
}

namespace detail {

inline std::vector<Vec2> loop_waypoints(double radius, const std::array<double, 10>& wobble) {
  std::vector<Vec2> w;
  for (std::size_t k = 0; k < wobble.size(); ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(wobble.size());
    const double r = radius * (1.0 + wobble[k]);
    w.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return w;
}

}  // namespace detail

/// Built-in fixture tracks: one closed loop of ten waypoints per town.
/// Town 3 is the longer loop with two traffic lights, a stop sign, a tunnel
/// and a roundabout; town 5 is shorter with one light and one stop sign.
inline Track make_track(std::int64_t town, std::int64_t track, std::int64_t regions = 5) {
  if (track != 1 || (town != 3 && town != 5))
    throw ValidationError("no fixture track " + std::to_string(track) + " in town " + std::to_string(town) +
                          "; available: town 3 track 1, town 5 track 1");
  if (town == 3) {
    return Track("town3/track1",
                 detail::loop_waypoints(170.0, {0.0, 0.06, -0.04, 0.08, -0.06, 0.03, -0.07, 0.05, 0.02, -0.03}), true,
                 even_region_bounds(10, regions),
                 {{LandmarkKind::TrafficLight, 1.6},
                  {LandmarkKind::StopSign, 3.5},
                  {LandmarkKind::Tunnel, 4.4, 1.0},
                  {LandmarkKind::Roundabout, 7.4},
                  {LandmarkKind::TrafficLight, 9.6}});
  }
  return Track("town5/track1",
               detail::loop_waypoints(140.0, {0.0, -0.05, 0.04, -0.03, 0.06, -0.04, 0.03, -0.05, 0.04, 0.02}), true,
               even_region_bounds(10, regions),
               {{LandmarkKind::TrafficLight, 3.6}, {LandmarkKind::StopSign, 7.5}});
}

}  // namespace advtest::harness
