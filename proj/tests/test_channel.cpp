#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "uavsec/channel.hpp"

using namespace uavsec;

TEST_CASE("3-D distance") {
  CHECK(Distance3d(Vec2(350, 100), Vec2(0, 0), 100) == doctest::Approx(377.4917).epsilon(1e-7));
  CHECK(Distance3d(Vec2(5, 5), Vec2(5, 5), 100) == 100.0);
  CHECK(Distance3d(Vec2(3, 4), Vec2(0, 0), 12) == doctest::Approx(13.0));
}

TEST_CASE("information channel gain") {
  const ScenarioConfig c = CanonicalDeskScenario();
  CHECK(InfoChannelGain(Vec2(1, 2), Vec2(1, 2), c) == doctest::Approx(1e-9));
  CHECK(InfoChannelGain(Vec2(0, 0), Vec2(350, 100), c) ==
        doctest::Approx(7.0175e-11).epsilon(1e-4));
  // Inverse square in the 3-D distance.
  const double g1 = InfoChannelGain(Vec2(0, 0), Vec2(0, 0), c);
  const double g2 = InfoChannelGain(Vec2(0, 0), Vec2(100, 0), c);
  CHECK(g2 == doctest::Approx(0.5 * g1));
}

TEST_CASE("steering vector") {
  ArrayParams one{1, 1, 0.1, 0.2};
  const CVec h1 = SteeringVector(Vec2(0, 0), Vec2(30, 40), one, 100);
  REQUIRE(h1.size() == 1);
  CHECK(std::abs(h1[0] - cplx(1, 0)) < 1e-15);

  // Directly overhead: sin(theta)=1, horizontal angle taken as 0.
  ArrayParams two{2, 1, 0.1, 0.2};
  const CVec h2 = SteeringVector(Vec2(7, 7), Vec2(7, 7), two, 100);
  CHECK(std::abs(h2[0] - cplx(1, 0)) < 1e-12);
  CHECK(std::abs(h2[1] - cplx(-1, 0)) < 1e-12);

  ArrayParams four{2, 2, 0.1, 0.2};
  const CVec h4 = SteeringVector(Vec2(0, 0), Vec2(120, -35), four, 100);
  for (int m = 0; m < 4; ++m) CHECK(std::abs(h4[m]) == doctest::Approx(1.0));
}

TEST_CASE("jammer channel matrix") {
  CVec h(1);
  h << 1.0;
  CHECK(std::abs(JammerChannelMatrix(h)(0, 0) - cplx(1, 0)) < 1e-15);

  CVec h2(2);
  h2 << 1.0, -1.0;
  const CMat M = JammerChannelMatrix(h2);
  CHECK(std::abs(M(0, 1) - cplx(-1, 0)) < 1e-15);
  CHECK(std::abs(M(1, 1) - cplx(1, 0)) < 1e-15);
  Eigen::SelfAdjointEigenSolver<CMat> es(M);
  CHECK(es.eigenvalues()[0] == doctest::Approx(0.0));
  CHECK(es.eigenvalues()[1] == doctest::Approx(2.0));

  ArrayParams four{2, 2, 0.1, 0.2};
  const CMat M4 = JammerChannelMatrix(SteeringVector(Vec2(3, 1), Vec2(90, 60), four, 100));
  CHECK(M4.trace().real() == doctest::Approx(4.0));
  CHECK((M4 - M4.adjoint()).norm() < 1e-14);
}

TEST_CASE("worst-case information gain over the disk") {
  const ScenarioConfig c = CanonicalDeskScenario();
  Eavesdropper e{Vec2(200, 200), 71.0};
  CHECK(WorstCaseInfoGain(Vec2(200, 200), e, c) == doctest::Approx(1e-9));
  CHECK(WorstCaseInfoGain(Vec2(371, 200), e, c) == doctest::Approx(5e-10));
  Eavesdropper point{Vec2(200, 200), 0.0};
  CHECK(WorstCaseInfoGain(Vec2(30, 80), point, c) ==
        doctest::Approx(InfoChannelGain(Vec2(30, 80), Vec2(200, 200), c)));
}

TEST_CASE("uncertainty samples layout") {
  Eavesdropper zero{Vec2(10, 20), 0.0};
  for (const auto& s : UncertaintySamples(zero, 9)) CHECK(s.position == Vec2(10, 20));

  Eavesdropper e{Vec2(10, 20), 71.0};
  const auto one = UncertaintySamples(e, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0].position == Vec2(10, 20));

  const auto nine = UncertaintySamples(e, 9);
  REQUIRE(nine.size() == 9);
  CHECK(nine[0].delta.norm() == 0.0);
  for (int g = 1; g < 9; ++g) {
    CHECK(nine[g].delta.norm() == doctest::Approx(71.0));
    const double ang = std::atan2(nine[g].delta.y(), nine[g].delta.x());
    double want = 2.0 * M_PI * (g - 1) / 8.0;
    if (want > M_PI) want -= 2.0 * M_PI;
    CHECK(ang == doctest::Approx(want));
  }
}

TEST_CASE("disk search finds weaker jamming than the sample grid") {
  const ScenarioConfig c = CanonicalDeskScenario();
  const Trajectory& jam = c.jammer_plan.trajectory;
  const LeakagePool pool = BuildLeakagePool(c, jam, 512, 7);
  const JammerChannels jc = BuildJammerChannels(c, jam, 9);
  // Beam toward the disk centre of eavesdropper 0.
  const CVec h = SteeringVector(jam.positions[0], c.eavesdroppers[0].est_position, c.array, c.H);
  const CMat Z = 0.25 * h * h.adjoint();
  double grid_min = 1e300;
  for (int g = 0; g < 9; ++g) {
    grid_min = std::min(grid_min, jc.A_E[0][g][0] * TraceProduct(jc.H_JE[0][g][0], Z));
  }
  Vec2 where;
  const double disk_min = DiskJamMin(pool, c, jam, 0, 0, Z, &where);
  CHECK(disk_min <= grid_min * (1 + 1e-12));
  CHECK((where - c.eavesdroppers[0].est_position).norm() <= 71.0 + 1e-9);
  CHECK(JamAt(c, jam.positions[0], where, Z) == doctest::Approx(disk_min));
}
