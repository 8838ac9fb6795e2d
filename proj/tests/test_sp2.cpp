#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "uavsec/sp2.hpp"

using namespace uavsec;

namespace {

constexpr double kLn2 = 0.69314718055994530942;

bool Psd(const Eigen::Matrix3d& F) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(F).eigenvalues().minCoeff() >= -1e-9;
}

}  // namespace

TEST_CASE("rate bound in the distance slack") {
  const double W = 7800.0;
  // gamma = u_j: value W alpha, slope -W alpha / (2 u_j ln 2).
  const double uj = 2e4;
  CHECK(RateLbU(uj, uj, uj, 1.0, W) == doctest::Approx(W));
  const double h = 1.0;
  CHECK((RateLbU(uj + h, uj, uj, 1.0, W) - RateLbU(uj, uj, uj, 1.0, W)) / h ==
        doctest::Approx(-W / (2 * uj * kLn2)));
  CHECK(RateBarU(uj, uj, 0.5, W) == doctest::Approx(0.5 * W));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(1e4, 3e5), G(1.0, 1e6), A(0.0, 1.0);
  int below = 0;
  for (int s = 0; s < 1000; ++s) {
    const double u = U(rng), uj2 = U(rng), g = G(rng), a = A(rng);
    const double exact = RateBarU(u, g, a, W);
    if (RateLbU(u, uj2, g, a, W) <= exact * (1 + 1e-12) + 1e-12) ++below;
    CHECK(RateLbU(uj2, uj2, g, a, W) == doctest::Approx(RateBarU(uj2, g, a, W)).epsilon(1e-12));
  }
  CHECK(below == 1000);

  // Gradient of the tangent matches the exact derivative at u_j.
  const double ujx = 5e4, g = 3e5;
  const double hh = 1e-3 * ujx;
  const double fd = (RateBarU(ujx + hh, g, 1.0, W) - RateBarU(ujx - hh, g, 1.0, W)) / (2 * hh);
  const double slope = (RateLbU(ujx + hh, ujx, g, 1.0, W) - RateLbU(ujx - hh, ujx, g, 1.0, W)) / (2 * hh);
  CHECK(slope == doctest::Approx(fd).epsilon(1e-5));

  CHECK_THROWS_AS(RateLbU(1.0, 0.0, 1.0, 1.0, W), DomainError);
  CHECK_THROWS_AS(RateBarU(-1.0, 1.0, 1.0, W), DomainError);
}

TEST_CASE("standoff and speed minorants") {
  const Vec2 tj(120, 80), tjam(100, 100), vj(3, -4);
  CHECK(StandoffLb(tj, tj, tjam) == doctest::Approx((tj - tjam).squaredNorm()));
  CHECK(SpeedSqLb(vj, vj) == doctest::Approx(25.0));
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> P(-300, 300), V(-30, 30);
  for (int s = 0; s < 1000; ++s) {
    const Vec2 t(P(rng), P(rng)), v(V(rng), V(rng));
    CHECK(StandoffLb(t, tj, tjam) <= (t - tjam).squaredNorm() + 1e-9);
    CHECK(SpeedSqLb(v, vj) <= v.squaredNorm() + 1e-12);
  }
}

TEST_CASE("linearized constant of the robust distance row") {
  const Vec2 tj(10, 20), that(40, -5);
  const double H = 100, need = 1234;
  // Tight at t_j.
  CHECK(SprocCTilde(tj, tj, that, H, need) ==
        doctest::Approx((tj - that).squaredNorm() + H * H - need));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> P(-200, 200);
  for (int s = 0; s < 1000; ++s) {
    const Vec2 t(P(rng), P(rng));
    CHECK(SprocCTilde(t, tj, that, H, need) <= (t - that).squaredNorm() + H * H - need + 1e-9);
  }
}

TEST_CASE("S-procedure matrix") {
  // Centred: blkdiag(I_2, 5) at psi = 0.
  const Vec2 t(7, 7);
  const Eigen::Matrix3d F = SprocLmi(t, 0.0, t, t, 10.0, 3.0, 4.0);
  Eigen::Matrix3d want = Eigen::Matrix3d::Identity();
  want(2, 2) = 5.0;
  CHECK((F - want).norm() < 1e-12);

  // Feasible matrix implies the whole disk clears the floor (at t = t_j).
  const Vec2 that(0, 0);
  const double Q = 50, H = 100;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> P(-150, 150), S(0.0, 3.0);
  int certified = 0;
  for (int s = 0; s < 1000; ++s) {
    const Vec2 tt(P(rng), P(rng));
    const double need = 1e4 + 4e3 * S(rng);
    const double psi = S(rng);
    if (!Psd(SprocLmi(tt, psi, tt, that, Q, H, need))) continue;
    ++certified;
    double worst = INFINITY;
    for (int a = 0; a < 64; ++a) {
      const Vec2 d = Q * Vec2(std::cos(a * M_PI / 32), std::sin(a * M_PI / 32));
      worst = std::min(worst, (tt + d - that).squaredNorm() + H * H);
    }
    CHECK(worst >= need * (1 - 1e-9));
  }
  CHECK(certified > 50);
}

TEST_CASE("expansion point from a trajectory") {
  const ScenarioConfig c = CanonicalDeskScenario();
  const Trajectory info = InitialInfoTrajectory(c);
  const Sp2ExpansionPoint p = ExpansionPointFrom(info, c);
  REQUIRE(p.u_j.size() == static_cast<size_t>(c.K()));
  CHECK(p.u_j[1][4] ==
        doctest::Approx((info.positions[4] - c.users[1].position).squaredNorm() + c.H * c.H));
  CHECK(p.t_j.size() == info.positions.size());
}

TEST_CASE("trajectory program start is strictly feasible") {
  const ScenarioConfig c = CanonicalDeskScenario();
  const Trajectory info = InitialInfoTrajectory(c);
  const Trajectory& jam = c.jammer_plan.trajectory;
  const JammerChannels jc = BuildJammerChannels(c, jam, 9);
  AllocationState a(c.K(), c.N_F, c.N, c.NJ());
  for (int n = 0; n < c.N; ++n) {
    a.Alpha(1, 0, n) = 1.0;
    a.P(1, 0, n) = 1e-7;
    a.Zm(0, n) = CMat::Identity(4, 4) * 1e-4;
  }
  const LeakagePool pool = BuildLeakagePool(c, jam, 512, 3);
  const Sp2Inputs in{c, a, jam, jc, &pool};
  const Sp2Params prm;
  const Sp2Constants k = ComputeSp2Constants(in, prm);
  const Sp2ExpansionPoint pt = ExpansionPointFrom(info, c);
  // Floors the start path already clears, as the solver does before its first program.
  std::vector<std::vector<double>> need = k.need;
  for (int e = 0; e < c.E(); ++e) {
    for (int n = 0; n < c.N; ++n) {
      const double gap = std::max(
          0.0, (info.positions[n] - c.eavesdroppers[e].est_position).norm() - c.eavesdroppers[e].radius);
      need[e][n] = std::min(need[e][n], 0.99 * (gap * gap + c.H * c.H));
    }
  }
  const Sp2Program P = BuildSp2(0.0, pt, in, k, need, prm, 1.0);
  CHECK(P.t_idx.size() == static_cast<size_t>(c.N));
  CHECK(P.v_idx.size() == static_cast<size_t>(c.N));
  CHECK(P.u_idx.size() == static_cast<size_t>(c.K() * c.N));
  const Eigen::VectorXd x0 = Sp2StartPoint(P, pt, in, need);
  CHECK(P.prob.FirstViolatedGroup(x0) == "");
  // Positions rebuilt from the start point are the expansion path.
  const Trajectory back = ExtractTrajectory(P, x0, c);
  for (int n = 0; n < info.size(); ++n) CHECK((back.positions[n] - info.positions[n]).norm() < 1e-6);
}

TEST_CASE("collision with the jammer is reported as C13") {
  const ScenarioConfig c = CanonicalDeskScenario();
  const Trajectory& jam = c.jammer_plan.trajectory;
  const JammerChannels jc = BuildJammerChannels(c, jam, 9);
  const AllocationState a(c.K(), c.N_F, c.N, c.NJ());
  const Sp2Inputs in{c, a, jam, jc};
  try {
    SolveSp2(in, Sp2Params{}, jam);
    FAIL("expected SubproblemInfeasible");
  } catch (const SubproblemInfeasible& e) {
    CHECK(std::string(e.what()).find("C13") != std::string::npos);
  }
}
