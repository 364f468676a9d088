#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "advtest/error.hpp"
#include "advtest/json_io.hpp"
#include "advtest/scenario/environment.hpp"
#include "advtest/scenario/interpreter.hpp"
#include "advtest/scoring/scoring.hpp"

namespace advtest::campaign {

inline constexpr std::int64_t kLedgerSchemaVersion = 1;

struct LedgerHeader {
  std::int64_t schema_version = kLedgerSchemaVersion;
  std::string tool_version;
  std::uint64_t seed = 0;
  std::string sampler;
  std::int64_t budget = 0;
  std::string controller;
  std::string track;
  std::string scene_digest;
  std::string agent_digest;
  std::string sampler_digest;
  scoring::WeightTable weights;
  std::string score = "composite";
  bool per_region_sampling = false;
  scenario::SearchSpace space;
  bool operator==(const LedgerHeader&) const = default;
};

struct LedgerRow {
  std::int64_t scene_id = 0;
  std::string sampler;
  scenario::SamplePoint point;  // the sampler's proposal, normalized
  scenario::SceneInstance scene;
  scoring::SceneResult result;
  bool failed = false;
  bool valid = true;
  double wall_time_s = 0;  // simulated scene time
  double overhead_s = 0;   // sampler time, when measured
  bool operator==(const LedgerRow&) const = default;
};

struct CampaignLedger {
  LedgerHeader header;
  std::vector<LedgerRow> rows;
  bool operator==(const CampaignLedger&) const = default;
};

inline nlohmann::json to_json(const scenario::SearchSpace& s) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : s.dims)
    dims.push_back({{"name", d.name},
                    {"low", d.low},
                    {"high", d.high},
                    {"kind", d.kind == scenario::DimKind::Integer ? "integer" : "continuous"}});
  return {{"dims", dims}, {"region_count", s.region_count}};
}

inline scenario::SearchSpace space_from_json(const nlohmann::json& j) {
  scenario::SearchSpace s;
  s.region_count = j.at("region_count").get<std::int64_t>();
  for (const auto& d : j.at("dims")) {
    const auto name = d.at("name").get<std::string>();
    const auto p = scenario::param_from_name(name);
    if (!p) throw LedgerError("unknown search dimension '" + name + "'");
    const auto kind = d.at("kind").get<std::string>();
    s.dims.push_back({name, *p, d.at("low").get<double>(), d.at("high").get<double>(),
                      kind == "integer" ? scenario::DimKind::Integer : scenario::DimKind::Continuous});
  }
  return s;
}

inline nlohmann::json header_json(const LedgerHeader& h) {
  return {{"format", "advtest-ledger"},
          {"schema_version", h.schema_version},
          {"tool_version", h.tool_version},
          {"seed", h.seed},
          {"sampler", h.sampler},
          {"budget", h.budget},
          {"controller", h.controller},
          {"track", h.track},
          {"digests", {{"scene", h.scene_digest}, {"agent", h.agent_digest}, {"sampler", h.sampler_digest}}},
          {"weights", h.weights},
          {"score", h.score},
          {"per_region_sampling", h.per_region_sampling},
          {"space", to_json(h.space)}};
}

inline LedgerHeader header_from_json(const nlohmann::json& j) {
  LedgerHeader h;
  h.schema_version = j.at("schema_version").get<std::int64_t>();
  h.tool_version = j.at("tool_version").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.sampler = j.at("sampler").get<std::string>();
  h.budget = j.at("budget").get<std::int64_t>();
  h.controller = j.at("controller").get<std::string>();
  h.track = j.at("track").get<std::string>();
  const auto& d = j.at("digests");
  h.scene_digest = d.at("scene").get<std::string>();
  h.agent_digest = d.at("agent").get<std::string>();
  h.sampler_digest = d.at("sampler").get<std::string>();
  h.weights = j.at("weights").get<scoring::WeightTable>();
  h.score = j.at("score").get<std::string>();
  h.per_region_sampling = j.at("per_region_sampling").get<bool>();
  h.space = space_from_json(j.at("space"));
  return h;
}

inline nlohmann::json row_json(const LedgerRow& r) {
  return {{"scene_id", r.scene_id},
          {"sampler", r.sampler},
          {"point", r.point.coords},
          {"scene", r.scene},
          {"result", r.result},
          {"failed", r.failed},
          {"valid", r.valid},
          {"wall_time_s", r.wall_time_s},
          {"overhead_s", r.overhead_s}};
}

inline LedgerRow row_from_json(const nlohmann::json& j) {
  LedgerRow r;
  r.scene_id = j.at("scene_id").get<std::int64_t>();
  r.sampler = j.at("sampler").get<std::string>();
  r.point.coords = j.at("point").get<std::vector<double>>();
  r.scene = j.at("scene").get<scenario::SceneInstance>();
  r.result = j.at("result").get<scoring::SceneResult>();
  r.failed = j.at("failed").get<bool>();
  r.valid = j.at("valid").get<bool>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  r.overhead_s = j.at("overhead_s").get<double>();
  return r;
}

inline std::string header_line(const LedgerHeader& h) { return dump_line(header_json(h)) + "\n"; }
inline std::string row_line(const LedgerRow& r) { return dump_line(row_json(r)) + "\n"; }

/// NDJSON text: one header line, then one line per row.
inline std::string serialize(const CampaignLedger& l) {
  std::string out = header_line(l.header);
  for (const auto& r : l.rows) out += row_line(r);
  return out;
}

inline void persist_ledger(const CampaignLedger& l, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw LedgerError("cannot open '" + path + "' for writing");
  f << serialize(l);
  f.flush();
  if (!f) throw LedgerError("failed writing ledger '" + path + "'");
}

/// Parse ledger text. Any defect aborts the whole load; corrupt rows are
/// reported with their line number and the last row that did parse.
inline CampaignLedger parse_ledger(const std::string& text) {
  CampaignLedger l;
  std::size_t line_no = 0, pos = 0;
  bool have_header = false;
  std::string last_valid = "none";
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      if (!have_header) throw LedgerError("line 1: ledger header is not valid JSON");
      throw LedgerError("line " + std::to_string(line_no) + ": corrupt or truncated row; last valid row is scene_id " +
                        last_valid);
    }
    if (!have_header) {
      if (!j.is_object() || !j.contains("schema_version") || !j["schema_version"].is_number_integer())
        throw LedgerError("line 1: missing ledger schema_version");
      const auto v = j["schema_version"].get<std::int64_t>();
      if (v > kLedgerSchemaVersion)
        throw LedgerError("ledger schema version " + std::to_string(v) + " is newer than supported version " +
                          std::to_string(kLedgerSchemaVersion));
      if (v < 1) throw LedgerError("invalid ledger schema version " + std::to_string(v));
      try {
        l.header = header_from_json(j);
      } catch (const nlohmann::json::exception& e) {
        throw LedgerError(std::string("line 1: malformed ledger header: ") + e.what());
      }
      have_header = true;
      continue;
    }
    LedgerRow r;
    try {
      r = row_from_json(j);
    } catch (const std::exception& e) {
      throw LedgerError("line " + std::to_string(line_no) + ": malformed row (" + e.what() +
                        "); last valid row is scene_id " + last_valid);
    }
    if (!l.rows.empty() && r.scene_id <= l.rows.back().scene_id)
      throw LedgerError("line " + std::to_string(line_no) + ": scene_id " + std::to_string(r.scene_id) +
                        " does not increase; last valid row is scene_id " + last_valid);
    last_valid = std::to_string(r.scene_id);
    l.rows.push_back(std::move(r));
  }
  if (!have_header) throw LedgerError("empty ledger file");
  if (!text.empty() && text.back() != '\n')
    throw LedgerError("line " + std::to_string(line_no) + ": truncated final line; last valid row is scene_id " +
                      (l.rows.size() >= 2 ? std::to_string(l.rows[l.rows.size() - 2].scene_id) : std::string("none")));
  return l;
}

inline CampaignLedger load_ledger(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw LedgerError("cannot open ledger '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ledger(ss.str());
}

}  // namespace advtest::campaign
