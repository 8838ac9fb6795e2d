// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "uavsec/export.hpp"
#include "uavsec/orchestrator.hpp"
#include "uavsec/power.hpp"

using namespace uavsec;

namespace {

int failures = 0;

void Report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s %2d %s | %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string Fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c, d);
  return buf;
}

void Log(const std::string& s) {
  std::fprintf(stderr, "[acceptance] %s\n", s.c_str());
}

SolveReport Timed(const std::string& label, const std::function<SolveReport()>& run) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport r = run();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Log(label + ": " + ToString(r.status) + Fmt(" EE %.6g in %.1f s, %g outer", r.ee, s,
                                              r.outer_iterations));
  return r;
}

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

RunSettings Settings(Scheme s) {
  RunSettings r;
  r.scheme = s;
  r.J_max_A4 = 10;
  return r;
}

// ---------------------------------------------------------------- criteria

void OuterTrace(const SolveReport& r) {
  bool mono = true;
  for (size_t i = 1; i < r.ee_trace.size(); ++i) {
    if (r.ee_trace[i] < r.ee_trace[i - 1] * (1.0 - 1e-8)) mono = false;
  }
  double last_rel = INFINITY;
  if (r.ee_trace.size() >= 2) {
    const double a = r.ee_trace[r.ee_trace.size() - 2], b = r.ee_trace.back();
    last_rel = std::abs(b - a) / std::max(std::abs(b), 1e-300);
  }
  const bool ok = r.Feasible() && mono && r.status == RunStatus::kConverged &&
                  r.outer_iterations <= 10 && last_rel <= 1e-3;
  Report(1, ok, "outer EE trace nondecreasing, converged within 10",
         Fmt("iterations %g, last relative change %.3g, monotone %g", r.outer_iterations,
             last_rel, mono));
}

void InnerResiduals(const SolveReport& r) {
  double worst = 0.0;
  int counted = 0;
  for (size_t i = 0; i < r.residuals.size(); ++i) {
    if (i < r.inner_converged.size() && !r.inner_converged[i]) continue;
    worst = std::max(worst, r.residuals[i]);
    ++counted;
  }
  Report(2, r.Feasible() && counted > 0 && worst <= 1e-6, "|N - qD| <= 1e-6 D at inner convergence",
         Fmt("%g stops, worst %.3g", counted, worst));
}

void RankOne(const SolveReport& r) {
  double worst = 0.0;
  int active = 0;
  for (const CMat& Z : r.alloc.Z) {
    if (Z.size() == 0 || Z.trace().real() <= 1e-9) continue;
    ++active;
    Eigen::SelfAdjointEigenSolver<CMat> es(Z);
    const auto& ev = es.eigenvalues();
    const double l1 = ev[ev.size() - 1], l2 = ev.size() > 1 ? ev[ev.size() - 2] : 0.0;
    worst = std::max(worst, std::max(l2, 0.0) / l1);
  }
  Report(3, r.Feasible() && worst <= 1e-6, "active covariances are rank one",
         Fmt("%g active, worst lambda2/lambda1 %.3g", active, worst));
}

void DenseLeakage(const SolveReport& r) {
  AuditOptions opt;
  opt.samples_per_eve = 10000;
  const AuditResult a = Audit(r.alloc, r.info, r.jammer, r.cfg, opt);
  const double lim = r.cfg.Gamma_th * (1.0 + 1e-3);
  Report(4, r.Feasible() && a.max_leakage_sinr <= lim, "dense leakage audit (1e4 points per disk)",
         Fmt("max leakage SINR %.6g, limit %.6g", a.max_leakage_sinr, lim));
}

void UserRates(const std::vector<const SolveReport*>& runs) {
  bool ok = true;
  std::string detail;
  for (const SolveReport* r : runs) {
    const double need = r->cfg.R_min * (1.0 - 1e-6);
    ok = ok && r->Feasible() && r->audit.min_user_rate >= need;
    detail += Fmt("R_min %g: min user rate %.6g; ", r->cfg.R_min, r->audit.min_user_rate);
  }
  Report(5, ok, "per-user rate floor", detail);
}

void Kinematics(const SolveReport& r) {
  bool ok = r.Feasible();
  std::string detail;
  for (const char* c : {"C10", "C11", "C12", "C13"}) {
    const ConstraintCheck* k = r.audit.Find(c);
    ok = ok && k && k->pass;
    detail += std::string(c) + Fmt(" %.3g ", k ? k->margin : NAN);
  }
  Report(6, ok, "kinematics and standoff", detail);
}

void FlightPowerCheck() {
  const FlightPowerParams fp;
  const double v = MinPowerSpeed(fp);
  const double p = FlightPower(10.4, fp);
  Report(7, v >= 9.0 && v <= 12.0 && std::abs(p - 121.2) <= 1.0, "flight power model",
         Fmt("minimizer %.4f m/s, P(10.4) %.4f W", v, p));
}

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
  const CMat Z = M * M.adjoint();
  return Z * (trace / Z.trace().real());
}

void Surrogates(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> U01(0.0, 1.0);
  const Trajectory info = InitialInfoTrajectory(cfg);
  const ChannelSet ch = BuildChannelSet(cfg, info, cfg.jammer_plan.trajectory, 9);
  const int nj = cfg.NJ();
  double tan_err = 0.0, grad_err = 0.0;
  int one_sided_bad = 0;

  // Rate DC bound and its gradient.
  for (int k = 0; k < cfg.K(); ++k) {
    for (int n = 0; n < cfg.N; n += 7) {
      const RateChannel rc{ch.info.h_IU[k][n], ch.jam.A_U[k][n], ch.jam.H_JU[k][n]};
      const double aj = 0.05 + 0.9 * U01(rng);
      const CMat Zj = RandomPsd(rng, nj, 1e-3 * (0.1 + U01(rng)));
      const double ptj = aj * 0.1 * U01(rng);
      const double ex = ExactRateTilde(aj, ptj, Zj, rc, cfg);
      tan_err = std::max(tan_err, std::abs(DcLowerBoundRate(aj, Zj, aj, ptj, Zj, rc, cfg) - ex) /
                                      std::max(1.0, std::abs(ex)));
      for (int s = 0; s < 1000; ++s) {
        const double a = 1e-3 + U01(rng);
        const double pt = a * U01(rng) * cfg.P_peak_I;
        const CMat Z = RandomPsd(rng, nj, 1e-5 + 1e-2 * U01(rng));
        const double e = ExactRateTilde(a, pt, Z, rc, cfg);
        const double scale = std::abs(D2Value(a, Z, rc, cfg)) + std::abs(e) + 1.0;
        if (DcLowerBoundRate(aj, Zj, a, pt, Z, rc, cfg) > e + 1e-11 * scale) ++one_sided_bad;
      }
      const D2Gradient g = D2Grad(aj, Zj, rc, cfg);
      const double h = 1e-6 * aj;
      const double fa = (D2Value(aj + h, Zj, rc, cfg) - D2Value(aj - h, Zj, rc, cfg)) / (2 * h);
      grad_err = std::max(grad_err, std::abs(g.d_alpha - fa) / std::max(1.0, std::abs(fa)));
      const CMat E = RandomHermitian(rng, nj) * 1e-4;
      const double hz = 1e-4;
      const double fz = (D2Value(aj, Zj + hz * E, rc, cfg) - D2Value(aj, Zj - hz * E, rc, cfg)) /
                        (2 * hz);
      double lin = 0.0;
      for (int r = 0; r < nj; ++r) {
        for (int c = 0; c < nj; ++c) lin += (g.d_Z(r, c) * E(r, c)).real();
      }
      grad_err = std::max(grad_err, std::abs(lin - fz) / std::max(1e-12, std::abs(fz)));
    }
  }

  // Scheduling penalty.
  for (int s = 0; s < 1000; ++s) {
    const double aj = U01(rng), a = U01(rng);
    tan_err = std::max(tan_err, std::abs(PenaltyUpperBound(aj, aj) - (aj - aj * aj)));
    if (PenaltyUpperBound(aj, a) < a - a * a - 1e-15) ++one_sided_bad;
  }

  // Trajectory surrogates: rate in the distance slack, standoff, speed, and
  // the linearized robust-distance constant.
  std::uniform_real_distribution<double> Uu(1e4, 3e5), Ug(1.0, 1e6), P(-300, 300), V(-30, 30);
  for (int s = 0; s < 1000; ++s) {
    const double uj = Uu(rng), u = Uu(rng), g = Ug(rng), a = U01(rng);
    const double tb = RateBarU(uj, g, a, cfg.W);
    tan_err = std::max(tan_err, std::abs(RateLbU(uj, uj, g, a, cfg.W) - tb) / std::max(1.0, tb));
    if (RateLbU(u, uj, g, a, cfg.W) > RateBarU(u, g, a, cfg.W) * (1 + 1e-12) + 1e-12) {
      ++one_sided_bad;
    }
    const Vec2 tj(P(rng), P(rng)), t(P(rng), P(rng)), tjam(P(rng), P(rng)), that(P(rng), P(rng));
    const Vec2 vj(V(rng), V(rng)), v(V(rng), V(rng));
    tan_err = std::max(tan_err, std::abs(StandoffLb(tj, tj, tjam) - (tj - tjam).squaredNorm()) /
                                    std::max(1.0, (tj - tjam).squaredNorm()));
    tan_err = std::max(tan_err, std::abs(SpeedSqLb(vj, vj) - vj.squaredNorm()) /
                                    std::max(1.0, vj.squaredNorm()));
    const double exact_c = (tj - that).squaredNorm() + cfg.H * cfg.H - 1e4;
    tan_err = std::max(tan_err, std::abs(SprocCTilde(tj, tj, that, cfg.H, 1e4) - exact_c) /
                                    std::max(1.0, std::abs(exact_c)));
    if (StandoffLb(t, tj, tjam) > (t - tjam).squaredNorm() + 1e-9) ++one_sided_bad;
    if (SpeedSqLb(v, vj) > v.squaredNorm() + 1e-9) ++one_sided_bad;
    if (SprocCTilde(t, tj, that, cfg.H, 1e4) > (t - that).squaredNorm() + cfg.H * cfg.H - 1e4 + 1e-9) {
      ++one_sided_bad;
    }
  }
  Report(8, tan_err <= 1e-8 && one_sided_bad == 0 && grad_err <= 1e-5,
         "surrogate tangency, one-sidedness and gradients",
         Fmt("tangency %.3g, one-sided violations %g, gradient error %.3g", tan_err, one_sided_bad,
             grad_err));
}

void SchemeOrder(const SolveReport& pa, const SolveReport& saj, const SolveReport& nj,
                 const SolveReport& sli) {
  const double e[4] = {pa.ee, saj.ee, nj.ee, sli.ee};
  bool ok = pa.Feasible() && saj.Feasible() && nj.Feasible() && sli.Feasible();
  double worst = INFINITY;
  for (int i = 0; i + 1 < 4; ++i) {
    const double gap = (e[i] - e[i + 1]) / std::max(std::abs(e[i + 1]), 1e-300);
    worst = std::min(worst, gap);
    if (gap < -0.02) ok = false;
  }
  Report(9, ok, "EE(PA) >= EE(SAJ) >= EE(NJ) >= EE(SLI)",
         Fmt("PA %.6g, SAJ %.6g, NJ %.6g, SLI %.6g", e[0], e[1], e[2], e[3]) +
             Fmt(", worst relative gap %.3g", worst));
}

void RadiusSweep(const std::vector<SweepPoint>& pts) {
  bool ok = true;
  int inversions = 0;
  std::string detail;
  for (size_t i = 0; i < pts.size(); ++i) {
    ok = ok && pts[i].report.Feasible();
    detail += Fmt("Q2=%g: %.6g; ", pts[i].value, pts[i].report.ee);
    if (i == 0) continue;
    const double prev = pts[i - 1].report.ee, cur = pts[i].report.ee;
    if (cur > prev) {
      ++inversions;
      if (cur > prev * 1.02) ok = false;
    }
  }
  ok = ok && inversions <= 1;
  Report(10, ok, "EE nonincreasing in Q2", detail + Fmt("inversions %g", inversions));
}

void Oracle(const ScenarioConfig& desk) {
  ScenarioConfig c = desk;
  c.N_F = 2;
  c.N = 2;
  c.Gamma_th = INFINITY;
  c.t0_I = Vec2(150, 390);
  c.tF_I = Vec2(152, 391);
  c.jammer_plan.trajectory = GenerateJammerTrajectory(c);
  const Trajectory info = InitialInfoTrajectory(c);
  const ChannelSet ch = BuildChannelSet(c, info, c.jammer_plan.trajectory, 9);
  const Sp1Inputs in{c, ch, info, c.jammer_plan.trajectory};
  const Sp1Params prm;

  const Sp1Result sp1 = SolveSp1(in, prm);
  // Every binary schedule: each (subcarrier, slot) goes to one user or stays idle.
  const int slots = c.N * c.N_F, choices = c.K() + 1;
  int combos = 1;
  for (int s = 0; s < slots; ++s) combos *= choices;
  double best = 0.0;
  std::vector<int> sched(slots);
  for (int m = 0; m < combos; ++m) {
    int x = m;
    bool any = false;
    for (int s = 0; s < slots; ++s) {
      sched[s] = x % choices - 1;
      x /= choices;
      any = any || sched[s] >= 0;
    }
    if (!any) continue;
    try {
      best = std::max(best, SolveSp1Fixed(in, prm, sched).q1);
    } catch (const SubproblemInfeasible&) {
    }
  }
  const double rel = std::abs(sp1.q1 - best) / std::max(best, 1e-300);
  Report(11, best > 0.0 && rel <= 0.01, "allocation matches exhaustive binary enumeration",
         Fmt("SP1 %.8g, enumeration %.8g over %g schedules, relative gap %.3g", sp1.q1, best,
             combos - 1, rel));
}

void Determinism(const SolveReport& a, const SolveReport& b, const RunSettings& s) {
  const auto root = std::filesystem::temp_directory_path() / "uavsec_acceptance";
  std::filesystem::remove_all(root);
  ExportResults(a, s, (root / "a").string());
  ExportResults(b, s, (root / "b").string());
  bool same = true;
  int files = 0;
  for (const auto& f : std::filesystem::directory_iterator(root / "a")) {
    ++files;
    if (Slurp(f.path()) != Slurp(root / "b" / f.path().filename())) same = false;
  }
  std::filesystem::remove_all(root);
  Report(12, same && files == 5, "exports byte-identical for identical config and seed",
         Fmt("%g files compared", files));
}

}  // namespace

int main() {
  const ScenarioConfig desk = LoadScenario(std::string(UAVSEC_CONFIG_DIR) + "/desk.json");

  const RunSettings pa_set = Settings(Scheme::kPA);
  const SolveReport pa = Timed("PA", [&] { return AlternateOptimize(desk, pa_set); });
  OuterTrace(pa);
  InnerResiduals(pa);
  RankOne(pa);
  DenseLeakage(pa);

  ScenarioConfig qos_cfg = desk;
  qos_cfg.R_min = 1.0;
  const SolveReport qos = Timed("PA, R_min 1", [&] { return AlternateOptimize(qos_cfg, pa_set); });
  UserRates({&pa, &qos});
  Kinematics(pa);
  FlightPowerCheck();
  Surrogates(desk);

  const SolveReport saj = Timed("SAJ", [&] { return RunBaseline(desk, Settings(Scheme::kSAJ)); });
  const SolveReport nj = Timed("NJ", [&] { return RunBaseline(desk, Settings(Scheme::kNJ)); });
  const SolveReport sli = Timed("SLI", [&] { return RunBaseline(desk, Settings(Scheme::kSLI)); });
  SchemeOrder(pa, saj, nj, sli);

  const std::vector<SweepPoint> sweep = RunSweep(desk, pa_set, "Q_2", {0.0, 25.0, 50.0, 100.0});
  RadiusSweep(sweep);

  Oracle(desk);

  const SolveReport again = Timed("PA rerun", [&] { return AlternateOptimize(desk, pa_set); });
  Determinism(pa, again, pa_set);

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
