#include <cmath>
#include <string>

#include "doctest.h"
#include "uavsec/scenario.hpp"

using namespace uavsec;

namespace {

std::string ErrorOf(const ScenarioConfig& c) {
  try {
    ParseScenario(SerializeScenario(c));
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("shipped desk config matches the canonical scenario") {
  const ScenarioConfig c = LoadScenario(std::string(UAVSEC_CONFIG_DIR) + "/desk.json");
  CHECK(SameConfig(c, CanonicalDeskScenario()));
  REQUIRE(c.K() == 2);
  REQUIRE(c.E() == 2);
  CHECK(c.H == 100.0);
  CHECK(c.users[0].position == Vec2(350, 100));
  CHECK(c.users[1].position == Vec2(150, 400));
  CHECK(c.eavesdroppers[0].est_position == Vec2(400, 100));
  CHECK(c.eavesdroppers[1].est_position == Vec2(250, 250));
  CHECK(c.N == 20);
  CHECK(c.N_F == 4);
  CHECK(c.NJ() == 4);
}

TEST_CASE("serialize then parse is the identity") {
  ScenarioConfig c = CanonicalDeskScenario();
  const std::string once = SerializeScenario(c);
  const ScenarioConfig back = ParseScenario(once);
  CHECK(SameConfig(c, back));
  CHECK(SerializeScenario(back) == once);

  c.jammer_plan.kind = JammerKind::kCA;
  c.jammer_plan.center = Vec2(400, 100);
  c.jammer_plan.radius = 10.0;
  c.P_C_J_per_antenna = 0.1;
  const ScenarioConfig back2 = ParseScenario(SerializeScenario(c));
  CHECK(SameConfig(c, back2));
}

TEST_CASE("validation rejects bad configs by name") {
  ScenarioConfig c = CanonicalDeskScenario();
  c.tau = 0.0;
  CHECK(ErrorOf(c) == "tau must be positive");

  ScenarioConfig far = CanonicalDeskScenario();
  far.t0_I = Vec2(0, 0);
  far.tF_I = Vec2(500, 500);
  far.N = 11;
  far.tau = 0.1;
  far.V_max_I = 30.0;
  const std::string msg = ErrorOf(far);
  CHECK(msg.find("unreachable") != std::string::npos);
  CHECK(msg.find("707.1") != std::string::npos);

  CHECK_THROWS_AS(ParseScenario("{not json"), ParseError);
  CHECK_THROWS_AS(ParseScenario("{\"N\": 20}"), ParseError);
}

TEST_CASE("CEA orbit is centred on the eavesdropper centroid") {
  const ScenarioConfig c = CanonicalDeskScenario();
  CHECK(c.jammer_plan.kind == JammerKind::kCEA);
  CHECK(c.jammer_plan.center.x() == doctest::Approx(325.0));
  CHECK(c.jammer_plan.center.y() == doctest::Approx(175.0));
  const Trajectory& j = c.jammer_plan.trajectory;
  REQUIRE(j.size() == c.N);
  for (int n = 0; n < j.size(); ++n) {
    CHECK((j.positions[n] - c.jammer_plan.center).norm() == doctest::Approx(159.0));
  }
}

TEST_CASE("CA orbit keeps radius and arc step") {
  ScenarioConfig c = CanonicalDeskScenario();
  c.jammer_plan.kind = JammerKind::kCA;
  c.jammer_plan.center = Vec2(400, 100);
  c.jammer_plan.radius = 10.0;
  c.jammer_plan.speed = 10.4;
  const Trajectory j = GenerateJammerTrajectory(c);
  for (int n = 0; n < j.size(); ++n) {
    CHECK(std::abs((j.positions[n] - Vec2(400, 100)).norm() - 10.0) < 1e-9);
    CHECK(j.velocities[n].norm() == doctest::Approx(10.4));
    if (n + 1 < j.size()) {
      CHECK((j.positions[n + 1] - j.positions[n]).norm() == doctest::Approx(1.04));
    }
  }
}

TEST_CASE("CSA with zero speed stays put") {
  ScenarioConfig c = CanonicalDeskScenario();
  c.jammer_plan.kind = JammerKind::kCSA;
  c.jammer_plan.radius = 150.0;
  c.jammer_plan.speed = 0.0;
  const ScenarioConfig p = ParseScenario(SerializeScenario(c));
  const Trajectory& j = p.jammer_plan.trajectory;
  for (int n = 1; n < j.size(); ++n) CHECK(j.positions[n] == j.positions[0]);
}

TEST_CASE("straight-line initial trajectory") {
  ScenarioConfig c = CanonicalDeskScenario();
  c.t0_I = Vec2(0, 0);
  c.tF_I = Vec2(500, 500);
  c.N = 501;
  c.tau = 0.1;
  const Trajectory t = InitialInfoTrajectory(c);
  REQUIRE(t.size() == 501);
  CHECK(t.velocities[0].x() == doctest::Approx(10.0));
  CHECK(t.velocities[0].y() == doctest::Approx(10.0));
  CHECK(t.velocities[0].norm() == doctest::Approx(14.1421356).epsilon(1e-6));
  // 0-based index 249 is the 250th waypoint.
  CHECK((t.positions[249] - Vec2(249, 249)).norm() < 1e-9);
  CHECK((t.positions[500] - Vec2(500, 500)).norm() < 1e-9);

  c.tF_I = c.t0_I;
  const Trajectory still = InitialInfoTrajectory(c);
  for (const Vec2& v : still.velocities) CHECK(v.norm() == 0.0);
}
