// Command-line front end: solve, validate, flight-power.
//
// Exit codes: 0 feasible result, 2 infeasible (solver or audit), 1 any error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uavsec/export.hpp"
#include "uavsec/metrics.hpp"
#include "uavsec/orchestrator.hpp"
#include "uavsec/power.hpp"
#include "uavsec/scenario.hpp"

namespace {

using namespace uavsec;

std::string ReadText(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Optional "run" object inside the config file.
RunSettings SettingsFromConfig(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_object() && j.contains("run")) return ParseRunSettings(j.at("run").dump());
  return RunSettings{};
}

void ParseSweep(const std::string& arg, std::string* param, std::vector<double>* values) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError("sweep must look like <param>=<v1,v2,...>");
  *param = arg.substr(0, eq);
  std::stringstream ss(arg.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      values->push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ParseError("bad sweep value '" + item + "'");
    }
  }
  if (values->empty()) throw ParseError("sweep has no values");
}

void PrintReport(const SolveReport& r) {
  std::cout << "scheme " << ToString(r.scheme) << "  status " << ToString(r.status);
  if (r.Feasible()) {
    std::cout << "  EE " << r.ee << " bit/J  outer iterations " << r.outer_iterations;
  } else if (!r.message.empty()) {
    std::cout << "  (" << r.phase << ": " << r.message << ")";
  }
  std::cout << "\n";
}

int Solve(const std::string& config, const std::string& scheme, const std::string& out,
          const std::string& sweep, uint64_t seed, bool seed_set, int max_outer) {
  const std::string text = ReadText(config);
  const ScenarioConfig cfg = ParseScenario(text);
  RunSettings rs = SettingsFromConfig(text);
  if (!scheme.empty()) rs.scheme = SchemeFromString(scheme);
  if (seed_set) rs.seed = seed;
  if (max_outer > 0) rs.J_max_A4 = max_outer;

  if (sweep.empty()) {
    const SolveReport r = RunBaseline(cfg, rs);
    PrintReport(r);
    ExportResults(r, rs, out);
    return r.Feasible() ? 0 : 2;
  }
  std::string param;
  std::vector<double> values;
  ParseSweep(sweep, &param, &values);
  const std::vector<SweepPoint> pts = RunSweep(cfg, rs, param, values);
  bool all_ok = true;
  for (const auto& p : pts) {
    std::ostringstream name;
    name << param << "=" << p.value;
    std::cout << name.str() << ": ";
    PrintReport(p.report);
    ExportResults(p.report, rs, (std::filesystem::path(out) / name.str()).string());
    all_ok = all_ok && p.report.Feasible();
  }
  std::filesystem::create_directories(out);
  std::ofstream(std::filesystem::path(out) / "sweep.csv", std::ios::binary) << SweepCsv(pts);
  return all_ok ? 0 : 2;
}

int Validate(const std::string& config, const std::string& solution) {
  const ScenarioConfig cfg = LoadScenario(config);
  std::cout << "config ok: K=" << cfg.K() << " E=" << cfg.E() << " N=" << cfg.N
            << " N_F=" << cfg.N_F << " N_J=" << cfg.NJ() << "\n";
  if (solution.empty()) return 0;
  const StoredSolution s = ParseSolution(ReadText(solution));
  if (s.alloc.K != cfg.K() || s.alloc.NF != cfg.N_F || s.alloc.N != cfg.N) {
    throw ParseError("solution dimensions do not match the config");
  }
  const AuditResult a = Audit(s.alloc, s.info, cfg.jammer_plan.trajectory, cfg);
  for (const auto& c : a.checks) {
    std::cout << (c.pass ? "pass " : "FAIL ") << c.name << "  margin " << c.margin;
    if (!c.pass) std::cout << "  at " << c.worst;
    std::cout << "\n";
  }
  std::cout << "max leakage SINR " << a.max_leakage_sinr << "  min user rate " << a.min_user_rate
            << "\n";
  return a.AllPass() ? 0 : 2;
}

int FlightPowerProbe(double speed) {
  const FlightPowerParams fp;
  const PowerBreakdown b = FlightPowerBreakdown(speed, fp);
  std::cout << "speed " << speed << " m/s\n"
            << "blade profile " << b.blade_profile << " W\n"
            << "induced " << b.induced << " W\n"
            << "parasite " << b.parasite << " W\n"
            << "total " << b.total << " W\n"
            << "minimum-power speed " << MinPowerSpeed(fp) << " m/s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient secure UAV communication planner"};
  app.require_subcommand(1);

  std::string config, scheme, out = "out", sweep, solution;
  uint64_t seed = 1;
  int max_outer = 0;
  double speed = 0.0;

  CLI::App* solve = app.add_subcommand("solve", "run the alternating optimization");
  solve->add_option("--config", config, "scenario JSON")->required();
  solve->add_option("--scheme", scheme, "PA|NJ|SAJ|ZAI|SLI|PERFECT_CSI");
  solve->add_option("--out", out, "output directory");
  solve->add_option("--sweep", sweep, "<param>=<v1,v2,...>");
  CLI::Option* seed_opt = solve->add_option("--seed", seed, "audit and search seed");
  solve->add_option("--max-outer", max_outer, "outer iteration cap");

  CLI::App* validate = app.add_subcommand("validate", "check a config, optionally audit a solution");
  validate->add_option("--config", config, "scenario JSON")->required();
  validate->add_option("--solution", solution, "summary.json of a previous run");

  CLI::App* fpow = app.add_subcommand("flight-power", "evaluate the propulsion power model");
  fpow->add_option("--speed", speed, "m/s")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    if (*solve) return Solve(config, scheme, out, sweep, seed, seed_opt->count() > 0, max_outer);
    if (*validate) return Validate(config, solution);
    if (*fpow) return FlightPowerProbe(speed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
