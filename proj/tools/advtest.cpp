// advtest: command-line front end.
//
//   advtest validate --scene S --agent A --sampler P
//   advtest run      --scene S --agent A --sampler P [--seed N] [--out L] [--timing] [--artifacts DIR]
//   advtest report   --ledger L [--json]
//   advtest compare  --scene S --ledger-a L1 --ledger-b L2 [--controller-a C] [--controller-b C]
//   advtest export   --ledger L [--out F.csv]
//
// Exit status: 0 success, 1 invalid input, 2 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "advtest/advtest.hpp"

namespace fs = std::filesystem;
using namespace advtest;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRuntime = 2;

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string out_dir() {
  const char* d = std::getenv("ADVTEST_OUT_DIR");
  return d && *d ? d : ".";
}

std::string default_path(const std::string& name) {
  fs::create_directories(out_dir());
  return (fs::path(out_dir()) / name).string();
}

struct SpecFiles {
  std::string scene, agent, sampler;
};

campaign::CampaignInputs load_inputs(const SpecFiles& f) {
  campaign::CampaignInputs in;
  const auto parse = [](const std::string& path, auto fn) {
    try {
      return fn(read_file(path));
    } catch (const SyntaxError& e) {
      throw ValidationError(path + ":" + e.what());
    } catch (const SemanticError& e) {
      throw ValidationError(path + ":" + e.what());
    }
  };
  in.scene_text = read_file(f.scene);
  in.agent_text = read_file(f.agent);
  in.sampler_text = read_file(f.sampler);
  in.scene = parse(f.scene, [](const std::string& t) { return sdl::parse_scene_spec(t); });
  in.agent = parse(f.agent, [](const std::string& t) { return sdl::parse_agent_spec(t); });
  in.sampler = parse(f.sampler, [](const std::string& t) { return sdl::parse_sampler_spec(t); });
  return in;
}

void print_findings(const sdl::ValidationReport& r) {
  for (const auto& f : r.findings)
    std::cerr << to_string(f.severity) << " [" << f.code << "] " << f.message << "\n";
}

int cmd_validate(const SpecFiles& f) {
  const auto in = load_inputs(f);
  const auto rep = sdl::validate_cross(in.scene, in.agent, in.sampler);
  print_findings(rep);
  if (rep.has_errors()) return kExitInvalid;
  std::cout << "ok" << (rep.empty() ? "" : " (with warnings)") << "\n";
  return kExitOk;
}

int cmd_run(const SpecFiles& f, std::optional<std::uint64_t> seed, std::string out, bool timing,
            const std::string& artifacts) {
  auto in = load_inputs(f);
  if (seed) in.sampler.seed = *seed;
  const auto rep = sdl::validate_cross(in.scene, in.agent, in.sampler);
  print_findings(rep);
  if (rep.has_errors()) return kExitInvalid;

  if (out.empty())
    out = default_path(std::string(sdl::name(in.sampler.sampler)) + "_" + std::to_string(in.sampler.seed) +
                       ".ledger.jsonl");
  if (!artifacts.empty()) fs::create_directories(artifacts);

  // Stream the ledger so an interrupted campaign keeps every finished row.
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  if (!file) throw LedgerError("cannot open '" + out + "' for writing");
  campaign::CampaignOptions opt;
  opt.timing = timing;
  opt.on_header = [&](const campaign::LedgerHeader& h) {
    file << campaign::header_line(h);
    file.flush();
  };
  opt.on_row = [&](const campaign::LedgerRow& r) {
    file << campaign::row_line(r);
    file.flush();
    if (!file) throw LedgerError("failed writing ledger '" + out + "'");
    if (!artifacts.empty()) campaign::write_scene_artifact(r.scene, artifacts);
  };
  const auto ledger = campaign::run_campaign(in, opt);
  const auto r = campaign::report(ledger);
  std::cout << "ledger: " << out << "\n"
            << "scenes: " << r.total << " (valid " << r.valid << ", failed " << r.failed << ")\n"
            << "FT: " << format_double(r.failed_test_rate) << "%\n";
  return kExitOk;
}

std::string percent(std::uint64_t n, std::uint64_t d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", d ? 100.0 * static_cast<double>(n) / static_cast<double>(d) : 0.0);
  return buf;
}

nlohmann::json report_json(const campaign::CampaignReport& r) {
  nlohmann::json kinds = nlohmann::json::object(), cases = nlohmann::json::object();
  for (std::size_t k = 0; k < scoring::kInfractionKinds; ++k) {
    kinds[std::string(scoring::kInfractionNames[k])] = r.totals.counts[k];
    cases[std::string(scoring::kInfractionNames[k])] = r.cases_with[k];
  }
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : r.clusters) clusters.push_back({{"centroid", c.centroid}, {"members", c.members}});
  return {{"total", r.total},
          {"valid", r.valid},
          {"failed", r.failed},
          {"failed_test_rate", r.failed_test_rate},
          {"infractions", kinds},
          {"cases_with", cases},
          {"cases_with_collision", r.cases_with_collision},
          {"cases_with_infraction", r.cases_with_infraction},
          {"total_execution_time_s", r.total_execution_time_s},
          {"scenes_per_region", r.scenes_per_region},
          {"failures_per_region", r.failures_per_region},
          {"clusters", clusters},
          {"weights", r.weights}};
}

int cmd_report(const std::string& path, bool json) {
  const auto l = campaign::load_ledger(path);
  const auto r = campaign::report(l);
  if (json) {
    std::cout << dump_line(report_json(r)) << "\n";
    return kExitOk;
  }
  std::cout << "sampler " << l.header.sampler << ", controller " << l.header.controller << ", track "
            << l.header.track << ", seed " << l.header.seed << "\n";
  std::cout << "scenes " << r.total << ", valid " << r.valid << ", failed " << r.failed << ", FT "
            << format_double(r.failed_test_rate) << "%\n";
  std::cout << "collision cases " << percent(r.cases_with_collision, r.valid) << ", infraction cases "
            << percent(r.cases_with_infraction, r.valid) << "\n";
  std::cout << "infractions:\n";
  for (std::size_t k = 0; k < scoring::kInfractionKinds; ++k)
    std::cout << "  " << scoring::kInfractionNames[k] << " " << r.totals.counts[k] << " (" << r.cases_with[k]
              << " cases)\n";
  std::cout << "per region (failed/scenes):";
  for (std::size_t i = 0; i < r.scenes_per_region.size(); ++i)
    std::cout << " " << r.failures_per_region[i] << "/" << r.scenes_per_region[i];
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.total_execution_time_s);
  std::cout << "\ntotal execution time " << secs << " s\n";
  std::cout << "clusters " << r.clusters.size() << "\n";
  for (const auto& c : r.clusters) {
    std::cout << "  size " << c.members.size() << " centroid";
    for (std::size_t i = 0; i < c.centroid.size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, " %s=%.3f", l.header.space.dims[i].name.c_str(), c.centroid[i]);
      std::cout << buf;
    }
    std::cout << "\n";
  }
  return kExitOk;
}

harness::ControllerHandle resolve_controller(const std::string& name, const sdl::AgentSpecification& agent) {
  sdl::AgentSpecification a = agent;
  a.controller = name;
  return campaign::controller_from_agent(a);
}

int cmd_compare(const std::string& scene_path, const std::string& agent_path, const std::string& pa,
                const std::string& pb, std::string ca, std::string cb) {
  const auto scene = sdl::parse_scene_spec(read_file(scene_path));
  sdl::AgentSpecification agent;
  if (!agent_path.empty()) agent = sdl::parse_agent_spec(read_file(agent_path));
  const auto la = campaign::load_ledger(pa);
  const auto lb = campaign::load_ledger(pb);
  if (ca.empty()) ca = la.header.controller;
  if (cb.empty()) cb = lb.header.controller;
  const auto track = campaign::track_for(scene);
  const auto score = la.header.score == "weighted" ? sdl::ScoreMode::Weighted : sdl::ScoreMode::Composite;
  const auto rep = campaign::compare_controllers(la, lb, track, resolve_controller(ca, agent),
                                                 resolve_controller(cb, agent),
                                                 campaign::scene_options(scene, agent, score));
  std::cout << "combined fail cases " << rep.cases.size() << "\n";
  std::cout << "                " << rep.controller_b << " pass  " << rep.controller_b << " fail\n";
  std::cout << rep.controller_a << " pass  " << rep.matrix[0][0] << "  " << rep.matrix[0][1] << "\n";
  std::cout << rep.controller_a << " fail  " << rep.matrix[1][0] << "  " << rep.matrix[1][1] << "\n";
  std::cout << "complementary " << rep.complementary << "\n";
  std::cout << "cases by infraction (" << rep.controller_a << " / " << rep.controller_b << "):\n";
  for (std::size_t k = 0; k < campaign::kBreakdownNames.size(); ++k)
    std::cout << "  " << campaign::kBreakdownNames[k] << " " << rep.cases_with_a[k] << " / " << rep.cases_with_b[k]
              << "\n";
  const auto name = [](std::optional<campaign::Breakdown> b) {
    return b ? std::string(campaign::kBreakdownNames[static_cast<std::size_t>(*b)]) : std::string("none");
  };
  std::cout << "modal " << rep.controller_a << ": " << name(campaign::ComparisonReport::modal(rep.cases_with_a))
            << ", " << rep.controller_b << ": " << name(campaign::ComparisonReport::modal(rep.cases_with_b)) << "\n";
  return kExitOk;
}

int cmd_export(const std::string& path, std::string out) {
  const auto l = campaign::load_ledger(path);
  if (out.empty()) out = default_path(fs::path(path).stem().string() + ".csv");
  campaign::export_plot_data(l, out);
  std::cout << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Search-based adversarial scenario testing for driving controllers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SpecFiles files;
  std::optional<std::uint64_t> seed;
  std::string out, artifacts, ledger, ledger_a, ledger_b, controller_a, controller_b, agent_path;
  bool timing = false, json = false;

  auto* validate = app.add_subcommand("validate", "Check the three specification files");
  auto* run = app.add_subcommand("run", "Run a campaign and write its ledger");
  for (auto* sc : {validate, run}) {
    sc->add_option("--scene", files.scene, "Scene specification")->required();
    sc->add_option("--agent", files.agent, "Agent specification")->required();
    sc->add_option("--sampler", files.sampler, "Sampler specification")->required();
  }
  run->add_option("--seed", seed, "Override the sampler seed");
  run->add_option("--out", out, "Ledger path (default $ADVTEST_OUT_DIR/<sampler>_<seed>.ledger.jsonl)");
  run->add_flag("--timing", timing, "Record measured sampler overhead (ledger is then not reproducible)");
  run->add_option("--artifacts", artifacts, "Directory for per-scene JSON artifacts");

  auto* report = app.add_subcommand("report", "Summarize a ledger");
  report->add_option("--ledger", ledger, "Ledger file")->required();
  report->add_flag("--json", json, "Machine-readable output");

  auto* compare = app.add_subcommand("compare", "Re-run two controllers on the union of two ledgers' failures");
  compare->add_option("--scene", files.scene, "Scene specification of both campaigns")->required();
  compare->add_option("--agent", agent_path, "Agent specification (sensors, external endpoint)");
  compare->add_option("--ledger-a", ledger_a, "First ledger")->required();
  compare->add_option("--ledger-b", ledger_b, "Second ledger")->required();
  compare->add_option("--controller-a", controller_a, "Controller for A (default: ledger A's)");
  compare->add_option("--controller-b", controller_b, "Controller for B (default: ledger B's)");

  auto* exp = app.add_subcommand("export", "Write a ledger as CSV");
  exp->add_option("--ledger", ledger, "Ledger file")->required();
  exp->add_option("--out", out, "CSV path (default $ADVTEST_OUT_DIR/<ledger>.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*validate) return cmd_validate(files);
    if (*run) return cmd_run(files, seed, out, timing, artifacts);
    if (*report) return cmd_report(ledger, json);
    if (*compare) return cmd_compare(files.scene, agent_path, ledger_a, ledger_b, controller_a, controller_b);
    if (*exp) return cmd_export(ledger, out);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SemanticError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
