#pragma once

#include <chrono>
#include <fstream>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "advtest/campaign/ledger.hpp"
#include "advtest/harness/world.hpp"
#include "advtest/rng.hpp"
#include "advtest/sampling/sampler.hpp"
#include "advtest/scenario/interpreter.hpp"
#include "advtest/sdl/agent_spec.hpp"
#include "advtest/sdl/sampler_spec.hpp"
#include "advtest/sdl/scene_spec.hpp"
#include "advtest/text.hpp"
#include "advtest/version.hpp"

namespace advtest::campaign {

/// The three specifications plus, optionally, the exact file bytes they
/// were parsed from (digests use the bytes when present).
struct CampaignInputs {
  sdl::SceneSpecification scene;
  sdl::AgentSpecification agent;
  sdl::SamplerSpecification sampler;
  std::string scene_text;
  std::string agent_text;
  std::string sampler_text;
};

struct CampaignOptions {
  bool timing = false;  // measure sampler overhead with a wall clock (breaks byte-determinism)
  std::function<void(const LedgerHeader&)> on_header;  // called once, before the first scene
  std::function<void(const LedgerRow&)> on_row;
  std::optional<harness::ControllerHandle> controller;  // overrides the agent's controller
};

/// Weight table in force: defaults overridden by the scene's `weights` block.
inline scoring::WeightTable weight_table(const sdl::SceneSpecification& s) {
  auto w = scoring::default_weights();
  for (const auto& [k, v] : s.infraction_metrics.weights) w[k] = v;
  return w;
}

/// Resolve the agent's controller: a preset name, or `external` with an endpoint.
inline harness::ControllerHandle controller_from_agent(const sdl::AgentSpecification& a) {
  if (auto p = harness::preset(a.controller)) return *p;
  if (a.controller == "external") {
    if (a.endpoint.empty()) throw ValidationError("controller external requires an endpoint");
    return harness::ExternalEndpoint{a.endpoint, 1.0};
  }
  std::string names;
  for (auto n : harness::kPresetNames) names += std::string(n) + ", ";
  throw ValidationError("unknown controller '" + a.controller + "'; available: " + names + "external");
}

inline harness::Track track_for(const sdl::SceneSpecification& s) { return harness::make_track(s.town, s.track, s.regions); }

inline harness::SceneOptions scene_options(const sdl::SceneSpecification& s, const sdl::AgentSpecification& a,
                                           sdl::ScoreMode mode) {
  harness::SceneOptions o;
  o.record_frequency_hz = s.record_frequency_hz;
  o.weights = weight_table(s);
  o.metrics = s.infraction_metrics.enabled();
  o.score = mode;
  o.sensors = a.sensors;
  return o;
}

/// Seed of scene `scene_id` in a campaign seeded with `seed`.
inline std::uint64_t scene_seed(std::uint64_t seed, std::int64_t scene_id) {
  return derive_seed(derive_seed(seed, 0x5ce7e5eedULL), static_cast<std::uint64_t>(scene_id));
}

inline std::string digest(const std::string& text, const std::string& fallback) {
  return hex64(fnv1a64(text.empty() ? fallback : text));
}

/// Normalized box reachable from `prev` under the rate limits.
inline sampling::Box constraint_box(const scenario::SearchSpace& space, const scenario::EnvironmentConditions& prev,
                                    const sdl::ConstraintSet& c) {
  sampling::Box b = sampling::Box::unit(space.dimension());
  for (std::size_t i = 0; i < space.dimension(); ++i) {
    const auto p = space.dims[i].param;
    double delta = c.weather_delta;
    if (p == scenario::Param::TrafficDensity) delta = c.traffic_delta;
    if (p == scenario::Param::PedestrianDensity) delta = c.pedestrian_delta;
    if (!std::isfinite(delta)) continue;
    const double span = space.dims[i].high - space.dims[i].low;
    const double centre = space.normalize(i, prev.get(p));
    b.low[i] = centre - delta / span;
    b.high[i] = centre + delta / span;
  }
  return b.clipped();
}

/// Writes `<dir>/scene_<id>.json`, the materialized scene in artifact schema.
inline std::string write_scene_artifact(const scenario::SceneInstance& scene, const std::string& dir) {
  const std::string path = dir + "/scene_" + std::to_string(scene.scene_id) + ".json";
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << dump_line(nlohmann::json(scene)) << '\n';
  if (!f) throw Error("failed writing '" + path + "'");
  return path;
}

/**
 * Sample, constrain, materialize, execute, score and feed back, `budget`
 * times. Scene k drives region k mod regions. With per-region sampling,
 * every run of `regions` consecutive scenes is one traversal of the track and
 * regions after the first are rate-limited against the one before.
 */
inline CampaignLedger run_campaign(const CampaignInputs& in, const CampaignOptions& opt = {}) {
  const auto& spec = in.scene;
  if (in.sampler.budget < 1) throw ValidationError("budget must be at least 1");
  const auto part = scenario::partition_parameters(spec);
  const auto& space = part.space;
  const harness::Track track = track_for(spec);
  const harness::ControllerHandle controller = opt.controller ? *opt.controller : controller_from_agent(in.agent);
  const auto options = scene_options(spec, in.agent, in.sampler.score);
  auto sampler = sampling::make_sampler(in.sampler, space.dimension());

  CampaignLedger ledger;
  auto& h = ledger.header;
  h.tool_version = kToolVersion;
  h.seed = in.sampler.seed;
  h.sampler = std::string(sampler->name());
  h.budget = in.sampler.budget;
  h.controller = harness::controller_name(controller);
  h.track = track.name();
  h.scene_digest = digest(in.scene_text, sdl::serialize(in.scene));
  h.agent_digest = digest(in.agent_text, sdl::serialize(in.agent));
  h.sampler_digest = digest(in.sampler_text, sdl::serialize(in.sampler));
  h.weights = options.weights;
  h.score = in.sampler.score == sdl::ScoreMode::Composite ? "composite" : "weighted";
  h.per_region_sampling = spec.per_region_sampling;
  h.space = space;

  if (opt.on_header) opt.on_header(h);

  const std::int64_t regions = track.region_count();
  for (std::int64_t k = 0; k < in.sampler.budget; ++k) {
    const std::int64_t region = k % regions;
    std::optional<scenario::EnvironmentConditions> prev;
    sampling::ProposalContext ctx;
    if (spec.per_region_sampling && region > 0 && !ledger.rows.empty()) {
      prev = ledger.rows.back().scene.environment;
      ctx.constraint_region = constraint_box(space, *prev, spec.constraints);
    }

    const auto t0 = std::chrono::steady_clock::now();
    const auto point = sampler->next(ctx);
    const auto t1 = std::chrono::steady_clock::now();

    const double duration = harness::scene_duration(track.region_length(region));
    const auto scene = scenario::materialize_scene(point, space, part.fixed, region, prev, spec.constraints, k, duration);
    auto result = harness::run_scene(scene, track, controller, scene_seed(in.sampler.seed, k), options);

    LedgerRow row;
    row.scene_id = k;
    row.sampler = h.sampler;
    row.point = point;
    row.valid = result.valid();
    row.failed = row.valid && scoring::classify_failure(result);
    row.wall_time_s = result.wall_time_s;
    if (opt.timing) row.overhead_s = std::chrono::duration<double>(t1 - t0).count();
    row.scene = scene;
    row.result = std::move(result);

    if (row.valid) sampler->observe({space.normalize(row.scene.environment), row.result.test_score, row.failed});
    if (opt.on_row) opt.on_row(row);
    ledger.rows.push_back(std::move(row));
  }
  return ledger;
}

}  // namespace advtest::campaign
