#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "uavsec/export.hpp"
#include "uavsec/orchestrator.hpp"

using namespace uavsec;

namespace {

ScenarioConfig Tiny() {
  ScenarioConfig c = CanonicalDeskScenario();
  c.N = 4;
  c.N_F = 2;
  c.t0_I = Vec2(150, 390);
  c.tF_I = Vec2(154, 391);
  c.jammer_plan.trajectory = GenerateJammerTrajectory(c);
  return c;
}

RunSettings Fast() {
  RunSettings s;
  s.sp1.leak_pool = 256;
  s.sp1.J_max_outer = 4;
  s.sp2.J_max_outer = 3;
  s.audit.samples_per_eve = 500;
  return s;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scheme names") {
  for (Scheme s : {Scheme::kPA, Scheme::kNJ, Scheme::kSAJ, Scheme::kZAI, Scheme::kSLI,
                   Scheme::kPerfectCsi}) {
    CHECK(SchemeFromString(ToString(s)) == s);
  }
  CHECK(ToString(Scheme::kPerfectCsi) == "PERFECT_CSI");
  CHECK_THROWS_AS(SchemeFromString("pa"), std::invalid_argument);
  CHECK_THROWS_AS(SchemeFromString("XYZ"), std::invalid_argument);
}

TEST_CASE("scheme adjustments") {
  const ScenarioConfig c = CanonicalDeskScenario();
  const ScenarioConfig saj = ApplyScheme(c, Scheme::kSAJ);
  CHECK(saj.NJ() == 1);
  const ScenarioConfig pcsi = ApplyScheme(c, Scheme::kPerfectCsi);
  for (const auto& e : pcsi.eavesdroppers) CHECK(e.radius == 0.0);
  CHECK(SameConfig(ApplyScheme(c, Scheme::kPA), c));
}

TEST_CASE("sweep values") {
  const ScenarioConfig c = CanonicalDeskScenario();
  CHECK(ApplySweepValue(c, "P_peak_I", 0.5).P_peak_I == 0.5);
  CHECK(ApplySweepValue(c, "P_peak_J", 2.0).P_peak_J == 2.0);
  const ScenarioConfig q2 = ApplySweepValue(c, "Q_2", 25.0);
  CHECK(q2.eavesdroppers[1].radius == 25.0);
  CHECK(q2.eavesdroppers[0].radius == c.eavesdroppers[0].radius);
  for (const auto& e : ApplySweepValue(c, "Q_e", 30.0).eavesdroppers) CHECK(e.radius == 30.0);
  CHECK(ApplySweepValue(c, "N_J", 9.0).NJ() == 9);
  CHECK(ApplySweepValue(c, "K", 1.0).K() == 1);
  CHECK_THROWS(ApplySweepValue(c, "N_J", 5.0));
  CHECK_THROWS(ApplySweepValue(c, "bogus", 1.0));
}

TEST_CASE("run settings round trip") {
  RunSettings s = Fast();
  s.scheme = Scheme::kZAI;
  s.seed = 77;
  s.eps4 = 2e-3;
  const RunSettings back = ParseRunSettings(SerializeRunSettings(s));
  CHECK(back.scheme == Scheme::kZAI);
  CHECK(back.seed == 77);
  CHECK(back.eps4 == 2e-3);
  CHECK(back.sp1.leak_pool == 256);
  CHECK(SerializeRunSettings(back) == SerializeRunSettings(s));
  CHECK(ParseRunSettings("{}").J_max_A4 == RunSettings{}.J_max_A4);
  CHECK_THROWS_AS(ParseRunSettings("{"), ParseError);
}

TEST_CASE("complexity counts grow with the horizon") {
  ScenarioConfig c = CanonicalDeskScenario();
  const ComplexityCounts a = CountComplexity(c);
  c.N *= 2;
  const ComplexityCounts b = CountComplexity(c);
  CHECK(a.M1 > 0);
  CHECK(b.M1 > a.M1);
  CHECK(b.N2 > a.N2);
}

TEST_CASE("one outer pass with an infinite tolerance") {
  RunSettings s = Fast();
  s.eps4 = INFINITY;
  const SolveReport r = AlternateOptimize(Tiny(), s);
  REQUIRE(r.Feasible());
  CHECK(r.outer_iterations == 1);
  CHECK(r.ee_trace.size() == 1);
  CHECK(r.ee > 0.0);
}

TEST_CASE("exports are reproducible") {
  const ScenarioConfig c = Tiny();
  const RunSettings s = Fast();
  const SolveReport a = AlternateOptimize(c, s);
  const SolveReport b = AlternateOptimize(c, s);
  REQUIRE(a.Feasible());
  CHECK(a.ee == b.ee);

  const auto root = std::filesystem::temp_directory_path() / "uavsec_export_test";
  std::filesystem::remove_all(root);
  ExportResults(a, s, (root / "a").string());
  ExportResults(b, s, (root / "b").string());
  for (const char* f :
       {"trajectory.csv", "allocation.csv", "ee_trace.csv", "audit.csv", "summary.json"}) {
    const std::string x = Slurp(root / "a" / f);
    CHECK(!x.empty());
    CHECK(x == Slurp(root / "b" / f));
  }

  // Header plus one row per slot.
  const std::string traj = TrajectoryCsv(a);
  CHECK(std::count(traj.begin(), traj.end(), '\n') == c.N + 1);

  // The stored solution reads back.
  const StoredSolution back = ParseSolution(SummaryJson(a, s));
  CHECK(back.info.positions.size() == a.info.positions.size());
  CHECK((back.info.positions[2] - a.info.positions[2]).norm() < 1e-9);
  CHECK(back.alloc.p == a.alloc.p);
  std::filesystem::remove_all(root);
}

TEST_CASE("zero transmit power with a rate floor is infeasible") {
  ScenarioConfig c = Tiny();
  c.P_peak_I = 0.0;
  c.R_min = 1.0;
  const SolveReport r = AlternateOptimize(c, Fast());
  CHECK(r.status == RunStatus::kInfeasible);
  CHECK_FALSE(r.Feasible());
}
