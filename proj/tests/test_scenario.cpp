#include <gtest/gtest.h>

#include <cmath>

#include "advtest/rng.hpp"
#include "advtest/scenario/interpreter.hpp"
#include "advtest/sdl/scene_spec.hpp"

using namespace advtest;
using namespace advtest::scenario;

namespace {

const char* kFig4Body =
    "town: 5\ntrack: 1\nregions: 5\nweather {\n  cloudiness: [0,100]\n  precipitation: [0,100]\n"
    "  time-of-day: [-90,90]\n}\npedestrian_density: [0,3]\ntraffic_density: [0,10]\n"
    "constraints {\n  weather_delta: 2\n  traffic_delta: 2\n  pedestrian_delta: 1\n}\n";

sdl::ConstraintSet deltas(double w, double t, double p) {
  sdl::ConstraintSet c;
  c.weather_delta = w;
  c.traffic_delta = t;
  c.pedestrian_delta = p;
  return c;
}

}  // namespace

TEST(Partition, FigureSpaceInCanonicalOrder) {
  const auto part = partition_parameters(sdl::parse_scene_spec(kFig4Body));
  const auto& d = part.space.dims;
  ASSERT_EQ(d.size(), 5u);
  EXPECT_EQ(d[0].name, "cloudiness");
  EXPECT_EQ(d[1].name, "precipitation");
  EXPECT_EQ(d[2].name, "time_of_day");
  EXPECT_EQ(d[3].name, "traffic_density");
  EXPECT_EQ(d[4].name, "pedestrian_density");
  EXPECT_EQ(d[2].low, -90);
  EXPECT_EQ(d[2].high, 90);
  EXPECT_EQ(d[3].high, 10);
  EXPECT_EQ(d[4].high, 3);
  EXPECT_EQ(d[3].kind, DimKind::Integer);
  EXPECT_EQ(d[0].kind, DimKind::Continuous);
  EXPECT_EQ(part.space.region_count, 5);
  EXPECT_TRUE(part.fixed.empty());
}

TEST(Partition, AllLiteralIsAnError) {
  EXPECT_THROW(partition_parameters(sdl::parse_scene_spec(
                   "town: 5\ntrack: 1\nweather {\n cloudiness: 10\n precipitation: 0\n time_of_day: 45\n}\n"
                   "traffic_density: 3\npedestrian_density: 0\n")),
               ValidationError);
  EXPECT_THROW(partition_parameters(sdl::parse_scene_spec("town: 5\ntrack: 1\n")), ValidationError);
}

TEST(Partition, SingleRangeLeavesEverythingElseFixed) {
  const auto part =
      partition_parameters(sdl::parse_scene_spec("town: 5\ntrack: 1\nweather {\n precipitation: [0,100]\n}\n"));
  ASSERT_EQ(part.space.dimension(), 1u);
  EXPECT_EQ(part.space.dims[0].param, Param::Precipitation);
  ASSERT_EQ(part.fixed.size(), 4u);
  // Parameters not declared take the campaign's initial conditions.
  for (const auto& [k, v] : part.fixed) {
    if (k == "traffic_density") EXPECT_EQ(v, 5);
    else EXPECT_EQ(v, 0) << k;
  }
}

TEST(Partition, OutOfPhysicalBoundsIsRejected) {
  EXPECT_THROW(partition_parameters(sdl::parse_scene_spec("town: 5\ntrack: 1\nweather {\n cloudiness: [0,120]\n}\n")),
               SemanticError);
}

TEST(InitialConditions, DefaultsAndOverrides) {
  const auto d = initial_conditions(sdl::parse_scene_spec("town: 5\ntrack: 1\n"));
  EXPECT_EQ(d, (EnvironmentConditions{0, 0, 0, 5, 0}));
  const auto t50 = initial_conditions(
      sdl::parse_scene_spec("town: 5\ntrack: 1\ntraffic_density: [0,50]\ninitial {\n traffic_density: 50\n}\n"));
  EXPECT_EQ(t50.traffic_density, 50);
  EXPECT_THROW(initial_conditions(sdl::parse_scene_spec(
                   "town: 5\ntrack: 1\ntraffic_density: [0,50]\ninitial {\n traffic_density: 60\n}\n")),
               Error);
}

TEST(ApplyConstraints, ClampsTowardPrevious) {
  EnvironmentConditions prev{0, 10, 0, 5, 0}, cand{0, 80, 0, 0, 0};
  const auto out = apply_constraints(prev, cand, deltas(2, 2, 1));
  EXPECT_EQ(out.precipitation, 12);
  EXPECT_EQ(out.traffic_density, 3);
  const EnvironmentConditions near{1, 11, 1, 6, 1};
  EXPECT_EQ(apply_constraints(prev, near, deltas(2, 2, 1)), near);
}

TEST(ApplyConstraints, NeverExceedsDeltaInFloatingPoint) {
  Rng r(17);
  for (int i = 0; i < 20000; ++i) {
    EnvironmentConditions prev{r.uniform(0, 100), r.uniform(0, 100), r.uniform(-90, 90), 0, 0};
    EnvironmentConditions cand{r.uniform(0, 100), r.uniform(0, 100), r.uniform(-90, 90), 0, 0};
    const double w = r.uniform(0, 5);
    const auto out = apply_constraints(prev, cand, deltas(w, 1, 1));
    ASSERT_LE(std::fabs(out.cloudiness - prev.cloudiness), w);
    ASSERT_LE(std::fabs(out.precipitation - prev.precipitation), w);
    ASSERT_LE(std::fabs(out.time_of_day - prev.time_of_day), w);
  }
}

TEST(Materialize, FigureSpaceHandComputed) {
  const auto part = partition_parameters(sdl::parse_scene_spec(kFig4Body));
  // Coordinates follow the canonical dimension order: c, p, d, t, pedestrians.
  const SamplePoint p{{0, 0, 0.5, 0.5, 0.5}};
  const auto s = materialize_scene(p, part.space, part.fixed, 0, std::nullopt, {});
  EXPECT_EQ(s.environment.cloudiness, 0);
  EXPECT_EQ(s.environment.precipitation, 0);
  EXPECT_EQ(s.environment.time_of_day, 0);
  EXPECT_EQ(s.environment.traffic_density, 5);
  EXPECT_EQ(s.environment.pedestrian_density, 2);  // 1.5 rounds half to even
  EXPECT_EQ(s.region_index, 0);
}

TEST(Materialize, ZerosGiveLowerBounds) {
  const auto part = partition_parameters(sdl::parse_scene_spec(kFig4Body));
  const auto s = materialize_scene(SamplePoint{{0, 0, 0, 0, 0}}, part.space, part.fixed, 2, std::nullopt, {});
  EXPECT_EQ(s.environment, (EnvironmentConditions{0, 0, -90, 0, 0}));
}

TEST(Materialize, RoundHalfEven) {
  EXPECT_EQ(round_half_even(0.5), 0);
  EXPECT_EQ(round_half_even(1.5), 2);
  EXPECT_EQ(round_half_even(2.5), 2);
  EXPECT_EQ(round_half_even(-0.5), 0);
  EXPECT_EQ(round_half_even(2.6), 3);
}

TEST(Materialize, RespectsConstraintsAgainstPrevious) {
  const auto spec = sdl::parse_scene_spec(kFig4Body);
  const auto part = partition_parameters(spec);
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    SamplePoint a{{r.uniform(), r.uniform(), r.uniform(), r.uniform(), r.uniform()}};
    SamplePoint b{{r.uniform(), r.uniform(), r.uniform(), r.uniform(), r.uniform()}};
    const auto first = materialize_scene(a, part.space, part.fixed, 0, std::nullopt, spec.constraints);
    const auto second = materialize_scene(b, part.space, part.fixed, 1, first.environment, spec.constraints);
    const auto unconstrained = materialize_scene(b, part.space, part.fixed, 1, std::nullopt, spec.constraints);
    ASSERT_EQ(second.environment, apply_constraints(first.environment, unconstrained.environment, spec.constraints));
    ASSERT_LE(std::fabs(second.environment.precipitation - first.environment.precipitation), 2);
    ASSERT_LE(std::fabs(second.environment.traffic_density - first.environment.traffic_density), 2);
    ASSERT_LE(std::fabs(second.environment.pedestrian_density - first.environment.pedestrian_density), 1);
    ASSERT_EQ(second.environment.traffic_density, std::round(second.environment.traffic_density));
  }
}

TEST(SearchSpace, NormalizeInvertsDenormalize) {
  const auto part = partition_parameters(sdl::parse_scene_spec(kFig4Body));
  Rng r(8);
  for (int i = 0; i < 10000; ++i) {
    const auto k = static_cast<std::size_t>(r.below(3));
    const double x = r.uniform();
    ASSERT_NEAR(part.space.normalize(k, part.space.denormalize(k, x)), x, 1e-12);
  }
}

TEST(SceneInstance, JsonArtifactRoundTrip) {
  const auto part = partition_parameters(sdl::parse_scene_spec("town: 5\ntrack: 1\nweather {\n cloudiness: [0,100]\n}\n"));
  const auto s = materialize_scene(SamplePoint{{0.25}}, part.space, part.fixed, 3, std::nullopt, {}, 17, 41.5);
  const nlohmann::json j = s;
  for (auto key : {"scene_id", "region", "environment", "duration_s", "fixed"}) EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.get<SceneInstance>(), s);
}
