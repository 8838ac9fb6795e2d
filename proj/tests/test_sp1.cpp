#include <cmath>
#include <random>

#include "doctest.h"
#include "uavsec/sp1.hpp"

using namespace uavsec;

namespace {

struct Desk {
  ScenarioConfig cfg = CanonicalDeskScenario();
  Trajectory info = InitialInfoTrajectory(cfg);
  ChannelSet ch = BuildChannelSet(cfg, info, cfg.jammer_plan.trajectory, 9);

  RateChannel At(int k, int n) const {
    return RateChannel{ch.info.h_IU[k][n], ch.jam.A_U[k][n], ch.jam.H_JU[k][n]};
  }
};

CMat RandomHermitian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  CMat M(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) M(r, c) = cplx(g(rng), g(rng));
  }
  return 0.5 * (M + M.adjoint());
}

CMat RandomPsd(std::mt19937_64& rng, int n, double trace) {
  const CMat M = RandomHermitian(rng, n);
  CMat Z = M * M.adjoint();
  return Z * (trace / Z.trace().real());
}

// Linear change of D^II along dZ predicted by the gradient.
double DzTerm(const D2Gradient& g, const CMat& dZ) {
  double s = 0.0;
  for (int r = 0; r < dZ.rows(); ++r) {
    for (int c = 0; c < dZ.cols(); ++c) s += (g.d_Z(r, c) * dZ(r, c)).real();
  }
  return s;
}

}  // namespace

TEST_CASE("D2 gradient matches central differences") {
  const Desk d;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    const RateChannel rc = d.At(trial % 2, 3 * trial);
    const double a = 0.2 + 0.1 * trial;
    const CMat Z = RandomPsd(rng, 4, 1e-3);
    const D2Gradient g = D2Grad(a, Z, rc, d.cfg);

    const double h = 1e-6 * a;
    const double fa = (D2Value(a + h, Z, rc, d.cfg) - D2Value(a - h, Z, rc, d.cfg)) / (2 * h);
    CHECK(g.d_alpha == doctest::Approx(fa).epsilon(1e-5));

    const CMat E = RandomHermitian(rng, 4) * 1e-4;
    const double hz = 1e-4;
    const double fz =
        (D2Value(a, Z + hz * E, rc, d.cfg) - D2Value(a, Z - hz * E, rc, d.cfg)) / (2 * hz);
    CHECK(DzTerm(g, E) == doctest::Approx(fz).epsilon(1e-5));
  }
}

TEST_CASE("DC surrogate is tight at the expansion point and below elsewhere") {
  const Desk d;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const RateChannel rc = d.At(1, 5);
  const double aj = 0.4;
  const CMat Zj = RandomPsd(rng, 4, 2e-3);

  for (double pt : {0.0, 1e-4, 0.3}) {
    const double exact = ExactRateTilde(aj, pt, Zj, rc, d.cfg);
    const double lb = DcLowerBoundRate(aj, Zj, aj, pt, Zj, rc, d.cfg);
    CHECK(std::abs(lb - exact) <= 1e-8 * std::max(1.0, std::abs(exact)));
  }

  int violations = 0;
  for (int s = 0; s < 1000; ++s) {
    const double a = 1e-3 + u(rng);
    const double pt = a * u(rng) * d.cfg.P_peak_I;
    const CMat Z = RandomPsd(rng, 4, 1e-5 + 1e-2 * u(rng));
    const double exact = ExactRateTilde(a, pt, Z, rc, d.cfg);
    const double lb = DcLowerBoundRate(aj, Zj, a, pt, Z, rc, d.cfg);
    // The two sides are differences of terms near 1e5, so allow roundoff at that scale.
    const double scale = std::abs(D2Value(a, Z, rc, d.cfg)) + std::abs(exact) + 1.0;
    if (lb > exact + 1e-11 * scale) ++violations;
  }
  CHECK(violations == 0);

  CHECK_THROWS_AS(DcLowerBoundRate(0.0, Zj, 0.5, 0.1, Zj, rc, d.cfg), DomainError);
  CHECK_THROWS_AS(D2Grad(-0.1, Zj, rc, d.cfg), DomainError);
}

TEST_CASE("scheduling penalty bound") {
  CHECK(PenaltyUpperBound(0.5, 0.5) == doctest::Approx(0.25));
  CHECK(PenaltyUpperBound(0.3, 0.8) == doctest::Approx(0.41));
  CHECK(PenaltyUpperBound(0.0, 0.7) == doctest::Approx(0.7));
  for (double aj = 0.0; aj <= 1.0; aj += 0.1) {
    for (double a = 0.0; a <= 1.0; a += 0.05) {
      CHECK(PenaltyUpperBound(aj, a) >= a - a * a - 1e-15);
    }
  }
}

TEST_CASE("initial expansion point and default weight") {
  const ScenarioConfig c = CanonicalDeskScenario();
  const Sp1ExpansionPoint p = InitialExpansionPoint(c, 2.0);
  REQUIRE(p.alpha_j.size() == static_cast<size_t>(c.K() * c.N_F * c.N));
  CHECK(p.alpha_j[0] == doctest::Approx(0.5));
  const double want = 2.0 * c.P_peak_J / (2.0 * c.N_F * c.NJ() * c.K());
  CHECK(p.Z_tilde_j[7](2, 2).real() == doctest::Approx(want));
  CHECK(std::abs(p.Z_tilde_j[7](0, 1)) == 0.0);
  CHECK(DefaultChi(c) > 0.0);
}

TEST_CASE("program layout on two slots") {
  ScenarioConfig c = CanonicalDeskScenario();
  c.users.resize(1);
  c.N_F = 1;
  c.N = 2;
  c.t0_I = Vec2(150, 390);
  c.tF_I = Vec2(151, 390);
  c.jammer_plan.trajectory = GenerateJammerTrajectory(c);
  const Trajectory info = InitialInfoTrajectory(c);
  const ChannelSet ch = BuildChannelSet(c, info, c.jammer_plan.trajectory, 9);
  const Sp1Inputs in{c, ch, info, c.jammer_plan.trajectory};
  const Sp1Params prm;

  const Sp1Program relaxed = BuildSp1(0.0, InitialExpansionPoint(c), in, prm);
  // Per slot: alpha, p, p~ and two 4x4 Hermitian blocks.
  CHECK(relaxed.prob.num_vars() == 2 * (3 + 16 + 16));
  CHECK(relaxed.phase_var == -1);

  const std::vector<CMat> Z(2, CMat::Identity(4, 4) * 1e-3);
  const Sp1Program on = BuildSp1Fixed(0.0, {0, 0}, Z, in, prm);
  CHECK(on.prob.num_vars() == 2 * 17);
  CHECK(on.p_idx[0] == on.pt_idx[0]);
  const Sp1Program half = BuildSp1Fixed(0.0, {0, -1}, Z, in, prm);
  CHECK(half.prob.num_vars() == 17 + 16);
  CHECK(half.p_idx[1] == -1);

  // Phase one needs a QoS row to aim at.
  CHECK_THROWS_AS(BuildSp1(0.0, InitialExpansionPoint(c), in, prm, true), std::logic_error);
}

TEST_CASE("frozen schedule solve on a tiny instance") {
  ScenarioConfig c = CanonicalDeskScenario();
  c.N_F = 2;
  c.N = 2;
  c.t0_I = Vec2(150, 390);
  c.tF_I = Vec2(152, 391);
  c.jammer_plan.trajectory = GenerateJammerTrajectory(c);
  const Trajectory info = InitialInfoTrajectory(c);
  const ChannelSet ch = BuildChannelSet(c, info, c.jammer_plan.trajectory, 9);
  const Sp1Inputs in{c, ch, info, c.jammer_plan.trajectory};
  Sp1Params prm;
  prm.leak_pool = 512;

  const Sp1Result r = SolveSp1Fixed(in, prm, {1, 1, 1, -1});
  CHECK(r.q1 > 0.0);
  for (int n = 0; n < c.N; ++n) {
    for (int i = 0; i < c.N_F; ++i) {
      CHECK(r.alloc.Alpha(0, i, n) == 0.0);
      CHECK(r.alloc.P(0, i, n) == 0.0);
    }
  }
  CHECK(r.alloc.P(1, 1, 1) == 0.0);
  CHECK(r.alloc.P(1, 0, 0) > 0.0);
  for (double res : r.residuals) CHECK(res <= 1e-6);
}
