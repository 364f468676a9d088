#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>
#include <string>

#include "advtest/campaign/analysis.hpp"
#include "advtest/campaign/ledger.hpp"
#include "advtest/campaign/runner.hpp"
#include "advtest/sdl/agent_spec.hpp"
#include "advtest/sdl/sampler_spec.hpp"

using namespace advtest;
using namespace advtest::campaign;
namespace fs = std::filesystem;

namespace {

const std::string kSpecs = SPECS_DIR;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CampaignInputs inputs(const std::string& scene, const std::string& agent, const std::string& sampler) {
  CampaignInputs in;
  in.scene_text = slurp(kSpecs + "/" + scene);
  in.agent_text = slurp(kSpecs + "/" + agent);
  in.sampler_text = slurp(kSpecs + "/" + sampler);
  in.scene = sdl::parse_scene_spec(in.scene_text);
  in.agent = sdl::parse_agent_spec(in.agent_text);
  in.sampler = sdl::parse_sampler_spec(in.sampler_text);
  return in;
}

LedgerRow row(std::int64_t id, scoring::InfractionRecord inf, std::vector<double> point = {0.5, 0.5}) {
  LedgerRow r;
  r.scene_id = id;
  r.sampler = "random";
  r.point.coords = point;
  r.scene.scene_id = id;
  r.scene.region_index = id % 5;
  r.result.scene_id = id;
  r.result.infractions = inf;
  r.result.route_completion = inf.total() ? 0.5 : 1.0;
  r.failed = scoring::classify_failure(r.result);
  r.wall_time_s = 30;
  return r;
}

LedgerHeader header() {
  LedgerHeader h;
  h.tool_version = "test";
  h.sampler = "random";
  h.budget = 100;
  h.controller = "fragile";
  h.track = "town5/track1";
  h.weights = scoring::default_weights();
  h.space = scenario::partition_parameters(
                sdl::parse_scene_spec("town: 5\ntrack: 1\nregions: 5\nweather {\n cloudiness: [0,100]\n"
                                      " precipitation: [0,100]\n}\n"))
                .space;
  return h;
}

// 100 cases, 27 failing: 13 with a collision, the others spread over red
// light (8), stop sign (3), route deviation, off lane and timeout (2); one
// case shows both a red light and a timeout.
CampaignLedger figure_ledger() {
  using K = scoring::InfractionKind;
  CampaignLedger l;
  l.header = header();
  std::int64_t id = 0;
  auto add = [&](K k, int n) {
    for (int i = 0; i < n; ++i) {
      scoring::InfractionRecord r;
      r[k] = 1;
      l.rows.push_back(row(id++, r));
    }
  };
  add(K::CollisionVehicle, 13);
  add(K::RedLight, 7);
  {
    scoring::InfractionRecord r;
    r[K::RedLight] = 1;
    r[K::Timeout] = 1;
    l.rows.push_back(row(id++, r));
  }
  add(K::StopSign, 3);
  add(K::RouteDeviation, 1);
  add(K::OffLane, 1);
  add(K::Timeout, 1);
  while (id < 100) l.rows.push_back(row(id++, {}));
  return l;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ADVTEST_CLI) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("advtest_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Ledger, RoundTripsThroughText) {
  const auto l = run_campaign(inputs("town3_campaign.sdl", "fragile.agent", "rns.sampler"));
  ASSERT_EQ(l.rows.size(), 100u);
  const auto text = serialize(l);
  EXPECT_EQ(parse_ledger(text), l);
  EXPECT_EQ(serialize(parse_ledger(text)), text);
}

TEST(Ledger, TruncationNamesLastValidRow) {
  auto l = figure_ledger();
  l.rows.resize(5);
  auto text = serialize(l);
  text.resize(text.size() - 20);
  try {
    parse_ledger(text);
    FAIL() << "truncated ledger accepted";
  } catch (const LedgerError& e) {
    EXPECT_NE(std::string(e.what()).find("last valid row is scene_id 3"), std::string::npos) << e.what();
  }
}

TEST(Ledger, RejectsNewerSchemaAndEmptyFile) {
  auto h = header_json(header());
  h["schema_version"] = kLedgerSchemaVersion + 1;
  try {
    parse_ledger(dump_line(h) + "\n");
    FAIL();
  } catch (const LedgerError& e) {
    EXPECT_NE(std::string(e.what()).find("newer than supported"), std::string::npos);
  }
  EXPECT_THROW(parse_ledger(""), LedgerError);
  EXPECT_THROW(load_ledger("/nonexistent/ledger.jsonl"), LedgerError);
}

TEST(Report, FigureCounts) {
  const auto rep = report(figure_ledger());
  using K = scoring::InfractionKind;
  EXPECT_EQ(rep.total, 100u);
  EXPECT_EQ(rep.failed, 27u);
  EXPECT_DOUBLE_EQ(rep.failed_test_rate, 27.0);
  EXPECT_EQ(rep.totals.collisions(), 13u);
  EXPECT_EQ(rep.totals[K::RedLight], 8u);
  EXPECT_EQ(rep.totals[K::StopSign], 3u);
  EXPECT_EQ(rep.totals[K::RouteDeviation], 1u);
  EXPECT_EQ(rep.totals[K::OffLane], 1u);
  EXPECT_EQ(rep.totals[K::Timeout], 2u);
  EXPECT_EQ(rep.cases_with_collision, 13u);
  EXPECT_EQ(rep.cases_with_infraction, 14u);
  EXPECT_DOUBLE_EQ(rep.total_execution_time_s, 3000.0);
  EXPECT_EQ(rep.scenes_per_region, (std::vector<std::uint64_t>{20, 20, 20, 20, 20}));
  EXPECT_THROW(report(CampaignLedger{}), Error);
}

TEST(Report, TotalsMatchRowSums) {
  const auto l = run_campaign(inputs("town3_campaign.sdl", "lbc_like.agent", "halton.sampler"));
  const auto rep = report(l);
  scoring::InfractionRecord sum;
  std::uint64_t failed = 0, valid = 0;
  for (const auto& r : l.rows) {
    if (!r.valid) continue;
    ++valid;
    failed += r.failed;
    for (std::size_t k = 0; k < scoring::kInfractionKinds; ++k) sum.counts[k] += r.result.infractions.counts[k];
  }
  EXPECT_EQ(rep.totals, sum);
  EXPECT_EQ(rep.failed, failed);
  EXPECT_DOUBLE_EQ(rep.failed_test_rate, 100.0 * static_cast<double>(failed) / static_cast<double>(valid));
}

TEST(Clusters, AllPassHasNone) {
  auto l = figure_ledger();
  l.rows.erase(l.rows.begin(), l.rows.begin() + 27);
  EXPECT_TRUE(report(l).clusters.empty());
}

TEST(Clusters, NearbyFailuresMerge) {
  const auto c = cluster_points({{0.1, 0.1}, {0.15, 0.15}, {0.9, 0.9}}, {4, 7, 9});
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].members, (std::vector<std::int64_t>{4, 7}));
  EXPECT_NEAR(c[0].centroid[0], 0.125, 1e-12);
  EXPECT_EQ(c[1].members, (std::vector<std::int64_t>{9}));
  // Single linkage chains points that are each within the threshold.
  EXPECT_EQ(cluster_points({{0.0}, {0.1}, {0.2}, {0.3}}, {0, 1, 2, 3}).size(), 1u);
  EXPECT_DOUBLE_EQ(normalized_distance({0, 0}, {1, 1}), 1.0);
}

TEST(Campaign, RobustInClearWeatherNeverFails) {
  auto in = inputs("town3_campaign.sdl", "robust.agent", "random.sampler");
  in.scene = sdl::parse_scene_spec(
      "town: 3\ntrack: 1\nregions: 5\nweather {\n cloudiness: [0,10]\n precipitation: 0\n time_of_day: 90\n}\n"
      "traffic_density: 0\n");
  in.scene_text.clear();
  in.sampler.budget = 25;
  const auto rep = report(run_campaign(in));
  EXPECT_EQ(rep.failed_test_rate, 0.0);
  EXPECT_EQ(rep.valid, 25u);
}

TEST(Campaign, SceneKDrivesRegionKModRegions) {
  const auto l = run_campaign(inputs("town5_scene.sdl", "fragile.agent", "halton.sampler"));
  for (const auto& r : l.rows) ASSERT_EQ(r.scene.region_index, r.scene_id % 5);
}

TEST(Campaign, FeedbackIsCausal) {
  // A fresh sampler fed the ledger's rows in order must reproduce every proposal.
  for (auto name : {"rns.sampler", "gbo.sampler"}) {
    const auto in = inputs("town3_campaign.sdl", "lbc_like.agent", name);
    const auto l = run_campaign(in);
    const auto space = l.header.space;
    auto s = sampling::make_sampler(in.sampler, space.dimension());
    for (const auto& r : l.rows) {
      ASSERT_EQ(s->next(), r.point) << name << " scene " << r.scene_id;
      if (r.valid) s->observe({space.normalize(r.scene.environment), r.result.test_score, r.failed});
    }
  }
}

TEST(Campaign, PerRegionRateLimits) {
  const auto in = inputs("town3_regional.sdl", "fragile.agent", "gbo.sampler");
  const auto l = run_campaign(in);
  for (std::size_t i = 1; i < l.rows.size(); ++i) {
    if (l.rows[i].scene.region_index == 0) continue;
    const auto& a = l.rows[i - 1].scene.environment;
    const auto& b = l.rows[i].scene.environment;
    ASSERT_LE(std::fabs(a.precipitation - b.precipitation), 10);
    ASSERT_LE(std::fabs(a.cloudiness - b.cloudiness), 10);
    ASSERT_LE(std::fabs(a.time_of_day - b.time_of_day), 10);
    ASSERT_LE(std::fabs(a.traffic_density - b.traffic_density), 5);
  }
}

TEST(Campaign, ArtifactsRoundTrip) {
  const auto dir = scratch("artifacts");
  const auto l = run_campaign(inputs("town5_scene.sdl", "fragile.agent", "grid.sampler"));
  const auto path = write_scene_artifact(l.rows[3].scene, dir.string());
  EXPECT_EQ(fs::path(path).filename(), "scene_3.json");
  EXPECT_EQ(nlohmann::json::parse(slurp(path)).get<scenario::SceneInstance>(), l.rows[3].scene);
  fs::remove_all(dir);
}

TEST(Compare, SwappingLedgersTransposes) {
  const auto ia = inputs("town3_campaign.sdl", "lbc_like.agent", "rns.sampler");
  const auto ib = inputs("town3_campaign.sdl", "transfuser_like.agent", "rns.sampler");
  const auto la = run_campaign(ia), lb = run_campaign(ib);
  const auto track = harness::make_track(3, 1);
  const auto ca = controller_from_agent(ia.agent), cb = controller_from_agent(ib.agent);
  const auto ab = compare_controllers(la, lb, track, ca, cb);
  const auto ba = compare_controllers(lb, la, track, cb, ca);
  EXPECT_GT(ab.cases.size(), 0u);
  EXPECT_EQ(ab.cases.size(), ba.cases.size());
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_EQ(ab.matrix[i][j], ba.matrix[j][i]);
  EXPECT_EQ(ab.cases_with_a, ba.cases_with_b);
  EXPECT_EQ(ab.complementary, ab.matrix[0][1] + ab.matrix[1][0]);
}

TEST(Compare, EmptySideContributesNothing) {
  const auto ia = inputs("town3_campaign.sdl", "lbc_like.agent", "rns.sampler");
  const auto la = run_campaign(ia);
  CampaignLedger empty;
  empty.header = la.header;
  const auto track = harness::make_track(3, 1);
  const auto c = controller_from_agent(ia.agent);
  const auto rep = compare_controllers(la, empty, track, c, c);
  EXPECT_LE(rep.cases.size(), report(la).failed);
  EXPECT_EQ(rep.matrix[0][1] + rep.matrix[1][0], 0u);
  auto other = empty;
  other.header.space.dims.pop_back();
  EXPECT_THROW(compare_controllers(la, other, track, c, c), ValidationError);
}

TEST(Compare, DuplicateFailuresPooledOnce) {
  auto l = figure_ledger();
  const auto track = harness::make_track(5, 1);
  const auto c = *harness::preset("robust");
  const auto rep = compare_controllers(l, l, track, c, c);
  // Every failing row shares its environment with the others in its region.
  std::set<std::int64_t> regions;
  for (const auto& r : l.rows)
    if (r.failed) regions.insert(r.scene.region_index);
  EXPECT_EQ(rep.cases.size(), regions.size());
}

TEST(Export, CsvShape) {
  const auto l = run_campaign(inputs("town5_scene.sdl", "fragile.agent", "random.sampler"));
  const auto csv = export_csv(l);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line,
            "scene_id,region,cloudiness,precipitation,time_of_day,traffic_density,pedestrian_density,failed,"
            "test_score,valid");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    ASSERT_EQ(std::count(line.begin(), line.end(), ','), 9);
  }
  EXPECT_EQ(rows, l.rows.size());
  EXPECT_EQ(export_csv(parse_ledger(serialize(l))), csv);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli_codes");
  const std::string s = kSpecs + "/";
  EXPECT_EQ(run_cli("validate --scene " + s + "town5_scene.sdl --agent " + s + "fragile.agent --sampler " + s +
                    "random.sampler"),
            0);
  EXPECT_EQ(run_cli("validate --scene /nonexistent.sdl --agent " + s + "fragile.agent --sampler " + s +
                    "random.sampler"),
            1);
  std::ofstream(dir / "bad.sdl") << "town: 5\ntrack: 1\nweather {\n precipitation: [100,0]\n}\n";
  EXPECT_EQ(run_cli("validate --scene " + (dir / "bad.sdl").string() + " --agent " + s + "fragile.agent --sampler " +
                    s + "random.sampler"),
            1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  std::ofstream(dir / "cut.jsonl") << "{\"schema_version\":1";
  EXPECT_EQ(run_cli("report --ledger " + (dir / "cut.jsonl").string()), 2);
  fs::remove_all(dir);
}

TEST(Cli, RunIsByteDeterministic) {
  const auto dir = scratch("cli_run");
  const std::string s = kSpecs + "/";
  const std::string base =
      "run --scene " + s + "town5_scene.sdl --agent " + s + "lbc_like.agent --sampler " + s + "gbo.sampler --out ";
  ASSERT_EQ(run_cli(base + (dir / "a.jsonl").string()), 0);
  ASSERT_EQ(run_cli(base + (dir / "b.jsonl").string()), 0);
  const auto a = slurp((dir / "a.jsonl").string());
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp((dir / "b.jsonl").string()));
  EXPECT_EQ(run_cli("report --ledger " + (dir / "a.jsonl").string()), 0);
  EXPECT_EQ(run_cli("export --ledger " + (dir / "a.jsonl").string() + " --out " + (dir / "a.csv").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "a.csv"));
  fs::remove_all(dir);
}
