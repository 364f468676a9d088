#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "advtest/campaign/ledger.hpp"
#include "advtest/campaign/runner.hpp"
#include "advtest/error.hpp"
#include "advtest/harness/world.hpp"
#include "advtest/scoring/scoring.hpp"
#include "advtest/text.hpp"

namespace advtest::campaign {

inline constexpr double kClusterThreshold = 0.15;
inline constexpr double kDuplicateDistance = 1e-9;

/// Euclidean distance divided by sqrt(D), so the unit cube has diameter 1.
inline double normalized_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw Error("normalized distance needs equal, non-empty dimensions");
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s / static_cast<double>(a.size()));
}

struct Cluster {
  std::vector<double> centroid;
  std::vector<std::int64_t> members;  // scene ids, ascending
  bool operator==(const Cluster&) const = default;
};

/// Single-linkage clusters: points closer than `threshold` are joined, transitively.
inline std::vector<Cluster> cluster_points(const std::vector<std::vector<double>>& pts,
                                           const std::vector<std::int64_t>& ids, double threshold = kClusterThreshold) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (normalized_distance(pts[i], pts[j]) < threshold) {
        const auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  std::vector<Cluster> out;
  std::vector<std::ptrdiff_t> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<std::ptrdiff_t>(out.size());
      out.push_back({std::vector<double>(pts[i].size(), 0.0), {}});
    }
    auto& c = out[static_cast<std::size_t>(slot[r])];
    c.members.push_back(ids[i]);
    for (std::size_t k = 0; k < pts[i].size(); ++k) c.centroid[k] += pts[i][k];
  }
  for (auto& c : out)
    for (auto& v : c.centroid) v /= static_cast<double>(c.members.size());
  return out;
}

/// Mean normalized distance over all unordered pairs; 0 with fewer than two points.
inline double mean_pairwise_distance(const std::vector<std::vector<double>>& pts) {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      s += normalized_distance(pts[i], pts[j]);
      ++n;
    }
  return n ? s / static_cast<double>(n) : 0.0;
}

struct CampaignReport {
  std::uint64_t total = 0;
  std::uint64_t valid = 0;
  std::uint64_t failed = 0;
  double failed_test_rate = 0;                               // percent of valid rows
  scoring::InfractionRecord totals;                          // summed counts
  std::array<std::uint64_t, scoring::kInfractionKinds> cases_with{};  // rows with at least one of each kind
  std::uint64_t cases_with_collision = 0;
  std::uint64_t cases_with_infraction = 0;  // any non-collision kind
  double total_execution_time_s = 0;
  std::vector<Cluster> clusters;
  std::vector<std::uint64_t> scenes_per_region;
  std::vector<std::uint64_t> failures_per_region;
  scoring::WeightTable weights;
};

inline std::vector<std::vector<double>> failure_points(const CampaignLedger& l) {
  std::vector<std::vector<double>> pts;
  for (const auto& r : l.rows)
    if (r.failed) pts.push_back(r.point.coords);
  return pts;
}

inline CampaignReport report(const CampaignLedger& l) {
  if (l.rows.empty()) throw Error("cannot report on an empty ledger");
  CampaignReport rep;
  rep.weights = l.header.weights;
  const auto regions = static_cast<std::size_t>(std::max<std::int64_t>(1, l.header.space.region_count));
  rep.scenes_per_region.assign(regions, 0);
  rep.failures_per_region.assign(regions, 0);
  std::vector<double> times, overheads;
  std::vector<std::vector<double>> pts;
  std::vector<std::int64_t> ids;
  using scoring::InfractionKind;
  for (const auto& r : l.rows) {
    ++rep.total;
    times.push_back(r.wall_time_s);
    overheads.push_back(r.overhead_s);
    const auto reg = static_cast<std::size_t>(r.scene.region_index) % regions;
    ++rep.scenes_per_region[reg];
    if (!r.valid) continue;
    ++rep.valid;
    const auto& inf = r.result.infractions;
    for (std::size_t k = 0; k < scoring::kInfractionKinds; ++k) {
      rep.totals.counts[k] += inf.counts[k];
      if (inf.counts[k]) ++rep.cases_with[k];
    }
    if (inf.collisions()) ++rep.cases_with_collision;
    if (inf.total() > inf.collisions()) ++rep.cases_with_infraction;
    if (r.failed) {
      ++rep.failed;
      ++rep.failures_per_region[reg];
      pts.push_back(r.point.coords);
      ids.push_back(r.scene_id);
    }
  }
  rep.failed_test_rate = rep.valid ? scoring::failed_test_rate(rep.failed, rep.valid) : 0.0;
  rep.total_execution_time_s = scoring::total_execution_time(times, overheads);
  rep.clusters = cluster_points(pts, ids);
  return rep;
}

/// Grouped kinds used when comparing controllers: I_C plus the single kinds.
enum class Breakdown { Collision, RedLight, StopSign, RouteDeviation, OffLane, OffRoad, Timeout };
inline constexpr std::array<std::string_view, 7> kBreakdownNames = {"collision", "red_light", "stop_sign",
                                                                    "route_deviation", "off_lane", "off_road", "timeout"};

inline std::array<std::uint64_t, 7> breakdown(const scoring::InfractionRecord& r) {
  using K = scoring::InfractionKind;
  return {r.collisions(), r[K::RedLight], r[K::StopSign], r[K::RouteDeviation], r[K::OffLane], r[K::OffRoad],
          r[K::Timeout]};
}

struct ComparisonCase {
  scenario::SceneInstance scene;
  std::uint64_t seed = 0;
  scoring::SceneResult a;
  scoring::SceneResult b;
};

struct ComparisonReport {
  std::string controller_a;
  std::string controller_b;
  std::vector<ComparisonCase> cases;
  // matrix[i][j]: cases where a's outcome is i and b's is j (0 pass, 1 fail).
  std::array<std::array<std::uint64_t, 2>, 2> matrix{};
  std::uint64_t complementary = 0;  // exactly one controller passes
  std::array<std::uint64_t, 7> cases_with_a{};  // per Breakdown kind, cases showing it
  std::array<std::uint64_t, 7> cases_with_b{};

  static std::optional<Breakdown> modal(const std::array<std::uint64_t, 7>& c) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i] > c[best]) best = i;
    if (c[best] == 0) return std::nullopt;
    return static_cast<Breakdown>(best);
  }
};

inline bool same_space(const scenario::SearchSpace& a, const scenario::SearchSpace& b) {
  if (a.dims.size() != b.dims.size()) return false;
  for (std::size_t i = 0; i < a.dims.size(); ++i)
    if (a.dims[i].name != b.dims[i].name || a.dims[i].low != b.dims[i].low || a.dims[i].high != b.dims[i].high)
      return false;
  return true;
}

/// Seed derived from the case content so both ledgers' copies of a case agree.
inline std::uint64_t case_seed(const scenario::SceneInstance& s) {
  nlohmann::json j = {{"region", s.region_index}, {"environment", s.environment}, {"duration_s", s.duration_s}};
  return fnv1a64(dump_line(j));
}

/**
 * Pool the failed cases of both ledgers (duplicates in the same region at
 * normalized distance below 1e-9 are kept once, first occurrence wins), run
 * both controllers on every pooled case and tabulate the outcomes.
 */
inline ComparisonReport compare_controllers(const CampaignLedger& la, const CampaignLedger& lb,
                                            const harness::Track& track, const harness::ControllerHandle& ca,
                                            const harness::ControllerHandle& cb,
                                            const harness::SceneOptions& options = {}) {
  if (!same_space(la.header.space, lb.header.space))
    throw ValidationError("ledgers cover different search spaces; cannot combine their failure cases");
  const auto& space = la.header.space;
  std::vector<scenario::SceneInstance> pool;
  std::vector<std::vector<double>> keys;
  for (const auto* l : {&la, &lb})
    for (const auto& r : l->rows) {
      if (!r.failed) continue;
      const auto key = space.normalize(r.scene.environment).coords;
      bool dup = false;
      for (std::size_t i = 0; i < pool.size() && !dup; ++i)
        dup = pool[i].region_index == r.scene.region_index && normalized_distance(keys[i], key) < kDuplicateDistance;
      if (dup) continue;
      pool.push_back(r.scene);
      keys.push_back(key);
    }

  ComparisonReport rep;
  rep.controller_a = harness::controller_name(ca);
  rep.controller_b = harness::controller_name(cb);
  std::int64_t id = 0;
  for (auto scene : pool) {
    scene.scene_id = id++;
    ComparisonCase c;
    c.scene = scene;
    c.seed = case_seed(scene);
    c.a = harness::run_scene(scene, track, ca, c.seed, options);
    c.b = harness::run_scene(scene, track, cb, c.seed, options);
    const int fa = c.a.valid() && scoring::classify_failure(c.a) ? 1 : 0;
    const int fb = c.b.valid() && scoring::classify_failure(c.b) ? 1 : 0;
    ++rep.matrix[static_cast<std::size_t>(fa)][static_cast<std::size_t>(fb)];
    const auto ba = breakdown(c.a.infractions), bb = breakdown(c.b.infractions);
    for (std::size_t k = 0; k < 7; ++k) {
      rep.cases_with_a[k] += ba[k] > 0;
      rep.cases_with_b[k] += bb[k] > 0;
    }
    rep.cases.push_back(std::move(c));
  }
  rep.complementary = rep.matrix[0][1] + rep.matrix[1][0];
  return rep;
}

/// CSV: scene_id, region, one column per search dimension (physical units),
/// failed, test_score, valid.
inline std::string export_csv(const CampaignLedger& l) {
  std::string out = "scene_id,region";
  for (const auto& d : l.header.space.dims) out += "," + d.name;
  out += ",failed,test_score,valid\n";
  for (const auto& r : l.rows) {
    out += std::to_string(r.scene_id) + "," + std::to_string(r.scene.region_index);
    for (const auto& d : l.header.space.dims) out += "," + format_double(r.scene.environment.get(d.param));
    out += std::string(",") + (r.failed ? "1" : "0") + "," + format_double(r.result.test_score) + "," +
           (r.valid ? "1" : "0") + "\n";
  }
  return out;
}

inline void export_plot_data(const CampaignLedger& l, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << export_csv(l);
  f.flush();
  if (!f) throw Error("failed writing '" + path + "'");
}

}  // namespace advtest::campaign
