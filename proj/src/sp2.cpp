#include "uavsec/sp2.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "uavsec/metrics.hpp"
#include "uavsec/power.hpp"

namespace uavsec {

namespace {

using barrier::AffineTerm;
using barrier::ConcaveQuadTerm;
using barrier::LinearEq;
using barrier::LinearIneq;
using barrier::LmiIneq;
using barrier::NegCubeTerm;
using barrier::NegReciprocalTerm;
using barrier::SmoothIneq;
using barrier::SocIneq;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kLn2 = std::numbers::ln2;
// Relative room left between the start point and each slack bound.
constexpr double kStartMargin = 1e-7;

double BladeCoef(const FlightPowerParams& fp) {
  const double tip = fp.Omega * fp.r;
  return 3.0 * fp.P_o / (tip * tip);
}

double ParasiteCoef(const FlightPowerParams& fp) { return 0.5 * fp.d0 * fp.rho * fp.s * fp.A_r; }

// Largest squared horizontal reach from t0 plus the altitude, doubled.
double UBound(const ScenarioConfig& cfg, const Vec2& node) {
  const double reach = cfg.V_max_I * cfg.tau * cfg.N;
  const double d = (node - cfg.t0_I).norm() + reach;
  return 2.0 * (d * d + cfg.H * cfg.H);
}

// min over the disk of ||t - t_hat - d||^2 + H^2.
double RobustDist2(const Vec2& t, const Eavesdropper& eve, double H) {
  const double d = std::max(0.0, (t - eve.est_position).norm() - eve.radius);
  return d * d + H * H;
}

}  // namespace

Sp2ExpansionPoint ExpansionPointFrom(const Trajectory& info, const ScenarioConfig& cfg) {
  Sp2ExpansionPoint pt;
  pt.t_j = info.positions;
  pt.v_j = info.velocities;
  pt.u_j.assign(cfg.K(), std::vector<double>(cfg.N));
  for (int k = 0; k < cfg.K(); ++k) {
    for (int n = 0; n < cfg.N; ++n) {
      pt.u_j[k][n] = (info.positions[n] - cfg.users[k].position).squaredNorm() + cfg.H * cfg.H;
    }
  }
  return pt;
}

double RateBarU(double u, double gamma, double alpha, double W) {
  if (!(u > 0.0)) throw DomainError("distance slack must be positive");
  return W * alpha * std::log2(1.0 + gamma / u);
}

double RateLbU(double u, double u_j, double gamma, double alpha, double W) {
  if (!(u_j > 0.0)) throw DomainError("expansion point u_j must be positive");
  return W * alpha * std::log2(1.0 + gamma / u_j) -
         W * alpha * gamma * (u - u_j) / (u_j * (u_j + gamma) * kLn2);
}

double StandoffLb(const Vec2& t, const Vec2& t_j, const Vec2& t_jam) {
  const Vec2 g = t_j - t_jam;
  return g.squaredNorm() + 2.0 * g.dot(t - t_j);
}

double SpeedSqLb(const Vec2& v, const Vec2& v_j) { return 2.0 * v_j.dot(v) - v_j.squaredNorm(); }

double SprocCTilde(const Vec2& t, const Vec2& t_j, const Vec2& t_hat, double H, double need) {
  return t_hat.squaredNorm() + 2.0 * t.dot(t_j) - t_j.squaredNorm() - 2.0 * t_hat.dot(t) +
         H * H - need;
}

Eigen::Matrix3d SprocLmi(const Vec2& t, double psi, const Vec2& t_j, const Vec2& t_hat, double Q,
                         double H, double need) {
  Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
  F.topLeftCorner<2, 2>() = (psi + 1.0) * Eigen::Matrix2d::Identity();
  F.block<2, 1>(0, 2) = t - t_hat;
  F.block<1, 2>(2, 0) = (t - t_hat).transpose();
  F(2, 2) = -psi * Q * Q + SprocCTilde(t, t_j, t_hat, H, need);
  return F;
}

Sp2Constants ComputeSp2Constants(const Sp2Inputs& in, const Sp2Params& params) {
  const ScenarioConfig& cfg = in.cfg;
  const AllocationState& a = in.alloc;
  const int K = cfg.K(), NF = cfg.N_F, N = cfg.N, E = cfg.E();
  const double wn0 = cfg.NoisePower();
  const bool use_z = a.NJ > 0;
  Sp2Constants c;
  c.gamma_u.assign(K, std::vector<std::vector<double>>(NF, std::vector<double>(N, 0.0)));
  for (int k = 0; k < K; ++k) {
    for (int i = 0; i < NF; ++i) {
      for (int n = 0; n < N; ++n) {
        const double jam = use_z ? in.jam.A_U[k][n] * TraceProduct(in.jam.H_JU[k][n], a.Zm(i, n)) : 0.0;
        c.gamma_u[k][i][n] = a.P(k, i, n) * cfg.beta0 / (jam + wn0);
      }
    }
  }
  c.need.assign(E, std::vector<double>(N, 0.0));
  if (std::isfinite(cfg.Gamma_th)) {
    LeakagePool own;
    const LeakagePool* pool = in.pool;
    if (!pool && use_z) {
      own = BuildLeakagePool(cfg, in.jammer, 4096, 90001);
      pool = &own;
    }
    for (int e = 0; e < E; ++e) {
      for (int n = 0; n < N; ++n) {
        double g = 0.0;
        for (int i = 0; i < NF; ++i) {
          double p = 0.0;
          for (int k = 0; k < K; ++k) p = std::max(p, a.P(k, i, n));
          if (p <= 0.0) continue;
          const double jam = use_z ? DiskJamMin(*pool, cfg, in.jammer, e, n, a.Zm(i, n)) : 0.0;
          g = std::max(g, p * cfg.beta0 / (jam + wn0));
        }
        c.need[e][n] = g / cfg.Gamma_th;
      }
    }
  }
  c.comm_circuit.resize(N);
  for (int n = 0; n < N; ++n) {
    double comm = 0.0;
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < NF; ++i) comm += a.Alpha(k, i, n) * a.P(k, i, n);
    }
    c.comm_circuit[n] = cfg.zeta_I * comm + cfg.P_C_I;
  }
  if (params.jammer && cfg.NJ() > 0) {
    for (int n = 0; n < N; ++n) {
      std::vector<CMat> zs(a.Z.begin() + n * NF, a.Z.begin() + (n + 1) * NF);
      c.jammer_power += JammerTotalPower(zs, cfg, in.jammer.velocities[n].norm()).total;
    }
  }
  return c;
}

Sp2Program BuildSp2(double q, const Sp2ExpansionPoint& pt, const Sp2Inputs& in,
                    const Sp2Constants& kc, const std::vector<std::vector<double>>& need_eff,
                    const Sp2Params& params, double scale) {
  const ScenarioConfig& cfg = in.cfg;
  const FlightPowerParams& fp = cfg.flight;
  const AllocationState& a = in.alloc;
  Sp2Program S;
  S.N = cfg.N;
  S.K = cfg.K();
  S.E = cfg.E();
  S.scale = scale;
  const int N = S.N, K = S.K, E = S.E;
  barrier::Problem& P = S.prob;

  const int g_bound = P.AddGroup("bounds");
  const int g_c5a = P.AddGroup("C5a");
  const int g_c6 = P.AddGroup("C6");
  const int g_c7 = P.AddGroup("C7");
  const int g_c11 = P.AddGroup("C11");
  const int g_c12 = P.AddGroup("C12");
  const int g_c13 = P.AddGroup("C13");
  const int g_c22 = P.AddGroup("C22");
  const int g_c23 = P.AddGroup("C23");
  const int g_c24 = P.AddGroup("C24");
  const int g_c25 = P.AddGroup("C25");
  const int g_cube = P.AddGroup("cubic");

  S.t_idx.resize(N);
  S.v_idx.resize(N);
  for (int n = 0; n < N; ++n) S.t_idx[n] = P.AddVariables(2);
  const int v_shared = params.zai ? P.AddVariables(2) : -1;
  for (int n = 0; n < N; ++n) S.v_idx[n] = params.zai ? v_shared : P.AddVariables(2);
  S.u_idx.resize(K * N);
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) S.u_idx[k * N + n] = P.AddVariables(1);
  }
  S.ups_idx.resize(N);
  S.s_idx.resize(N);
  S.w_idx.resize(N);
  for (int n = 0; n < N; ++n) {
    S.ups_idx[n] = P.AddVariables(1);
    S.s_idx[n] = P.AddVariables(1);
    S.w_idx[n] = P.AddVariables(1);
  }
  S.psi_idx.assign(E * N, -1);
  for (int e = 0; e < E; ++e) {
    if (!(cfg.eavesdroppers[e].radius > 0.0)) continue;
    for (int n = 0; n < N; ++n) {
      if (need_eff[e][n] > 0.0) S.psi_idx[e * N + n] = P.AddVariables(1);
    }
  }
  P.SetBlocks({0, P.num_vars()});

  // C8, C9, C10.
  for (int d = 0; d < 2; ++d) {
    P.AddLinearEq({{S.t_idx[0] + d}, {1.0}, cfg.t0_I[d]});
    P.AddLinearEq({{S.t_idx[N - 1] + d}, {1.0}, cfg.tF_I[d]});
    for (int n = 0; n + 1 < N; ++n) {
      P.AddLinearEq({{S.t_idx[n + 1] + d, S.t_idx[n] + d, S.v_idx[n] + d}, {1.0, -1.0, -cfg.tau}, 0.0});
    }
  }

  // Objective pieces.
  S.num_u.assign(K * N, 0.0);
  const double bc = BladeCoef(fp), pc = ParasiteCoef(fp);
  S.den_const = kc.jammer_power;
  for (int n = 0; n < N; ++n) S.den_const += kc.comm_circuit[n] + fp.P_o;
  for (int k = 0; k < K; ++k) {
    for (int n = 0; n < N; ++n) {
      const double uj = pt.u_j[k][n];
      double slope = 0.0;
      for (int i = 0; i < cfg.N_F; ++i) {
        const double g = kc.gamma_u[k][i][n];
        const double al = a.Alpha(k, i, n);
        if (g <= 0.0 || al <= 0.0) continue;
        const double c = cfg.W * al * g / (uj * (uj + g) * kLn2);
        S.num_const += cfg.W * al * std::log2(1.0 + g / uj) + c * uj;
        slope -= c;
      }
      S.num_u[k * N + n] = slope;
      P.AddLinearObjective(S.u_idx[k * N + n], slope / scale);
    }
  }
  P.AddObjectiveConstant((S.num_const - q * S.den_const) / scale);
  std::vector<bool> v_done(P.num_vars(), false);
  for (int n = 0; n < N; ++n) {
    const int vx = S.v_idx[n], vy = vx + 1;
    const int up = S.ups_idx[n], s = S.s_idx[n], w = S.w_idx[n];
    if (q > 0.0) {
      P.AddObjectiveTerm(std::make_shared<ConcaveQuadTerm>(
          std::vector<int>{vx, vy}, (q * bc / scale) * MatrixXd::Identity(2, 2), VectorXd::Zero(2)));
      P.AddObjectiveTerm(std::make_shared<NegReciprocalTerm>(up, q * fp.P_i * fp.v0 / scale));
      P.AddLinearObjective(w, -q * pc / scale);
    }
    // C5a with the surrogate flight power.
    {
      MatrixXd Qm = MatrixXd::Zero(3, 3);
      Qm(0, 0) = Qm(1, 1) = bc;
      VectorXd b = VectorXd::Zero(3);
      b[2] = -pc;
      SmoothIneq c;
      c.group = g_c5a;
      c.terms.push_back(std::make_shared<ConcaveQuadTerm>(std::vector<int>{vx, vy, w}, Qm, b,
                                                          cfg.P_max_I - kc.comm_circuit[n] - fp.P_o));
      c.terms.push_back(std::make_shared<NegReciprocalTerm>(up, fp.P_i * fp.v0));
      P.AddSmoothIneq(std::move(c));
    }
    // s >= ||v||, w >= s^3.
    {
      SocIneq c;
      c.idx = {vx, vy, s};
      c.A = MatrixXd::Zero(2, 3);
      c.A(0, 0) = c.A(1, 1) = 1.0;
      c.a = VectorXd::Zero(2);
      c.c = VectorXd::Zero(3);
      c.c[2] = 1.0;
      c.group = g_cube;
      P.AddSoc(std::move(c));
      SmoothIneq cube;
      cube.group = g_cube;
      cube.terms.push_back(std::make_shared<AffineTerm>(std::vector<int>{w}, VectorXd::Ones(1)));
      cube.terms.push_back(std::make_shared<NegCubeTerm>(s, 1.0));
      P.AddSmoothIneq(std::move(cube));
    }
    // C23 and the strengthened C24.
    {
      const Vec2& vj = pt.v_j[n];
      MatrixXd Qm = MatrixXd::Zero(3, 3);
      Qm(2, 2) = 1.0;
      VectorXd b(3);
      b << 2.0 * vj.x(), 2.0 * vj.y(), 0.0;
      SmoothIneq c;
      c.group = g_c23;
      c.terms.push_back(
          std::make_shared<ConcaveQuadTerm>(std::vector<int>{vx, vy, up}, Qm, b, -vj.squaredNorm()));
      P.AddSmoothIneq(std::move(c));
      P.AddLowerBound(up, kVFloor, g_c24);
    }
    // C11 once per distinct velocity.
    if (!v_done[vx]) {
      v_done[vx] = true;
      SocIneq c;
      c.idx = {vx, vy};
      c.A = MatrixXd::Identity(2, 2);
      c.a = VectorXd::Zero(2);
      c.c = VectorXd::Zero(2);
      c.d = cfg.V_max_I;
      c.group = g_c11;
      P.AddSoc(std::move(c));
    }
    // C12
    if (!params.zai && n + 1 < N) {
      SocIneq c;
      c.idx = {vx, vy, S.v_idx[n + 1], S.v_idx[n + 1] + 1};
      c.A = MatrixXd::Zero(2, 4);
      c.A(0, 0) = c.A(1, 1) = -1.0;
      c.A(0, 2) = c.A(1, 3) = 1.0;
      c.a = VectorXd::Zero(2);
      c.c = VectorXd::Zero(4);
      c.d = cfg.V_acc_I;
      c.group = g_c12;
      P.AddSoc(std::move(c));
    }
    // C13 linearized: ||t_j - t_J||^2 + 2 (t_j - t_J)^T (t - t_j) >= d_min^2.
    {
      const Vec2 g = pt.t_j[n] - in.jammer.positions[n];
      const int tx = S.t_idx[n];
      P.AddLinearIneq({{tx, tx + 1},
                       {-2.0 * g.x(), -2.0 * g.y()},
                       g.squaredNorm() - 2.0 * g.dot(pt.t_j[n]) - cfg.d_min * cfg.d_min,
                       g_c13});
    }
    // C22: u_k >= ||t - t_k||^2 + H^2, plus a far upper bound.
    for (int k = 0; k < K; ++k) {
      const Vec2& tk = cfg.users[k].position;
      const int tx = S.t_idx[n], u = S.u_idx[k * N + n];
      MatrixXd Qm = MatrixXd::Zero(3, 3);
      Qm(0, 0) = Qm(1, 1) = 1.0;
      VectorXd b(3);
      b << 2.0 * tk.x(), 2.0 * tk.y(), 1.0;
      SmoothIneq c;
      c.group = g_c22;
      c.terms.push_back(std::make_shared<ConcaveQuadTerm>(std::vector<int>{tx, tx + 1, u}, Qm, b,
                                                          -tk.squaredNorm() - cfg.H * cfg.H));
      P.AddSmoothIneq(std::move(c));
      P.AddUpperBound(u, UBound(cfg, tk), g_bound);
    }
  }

  // C6: average rate lower bound per user.
  if (cfg.R_min > 0.0) {
    for (int k = 0; k < K; ++k) {
      LinearIneq c;
      c.group = g_c6;
      double cst = 0.0;
      for (int n = 0; n < N; ++n) {
        const double uj = pt.u_j[k][n];
        double slope = 0.0;
        for (int i = 0; i < cfg.N_F; ++i) {
          const double g = kc.gamma_u[k][i][n];
          const double al = a.Alpha(k, i, n);
          if (g <= 0.0 || al <= 0.0) continue;
          const double cc = cfg.W * al * g / (uj * (uj + g) * kLn2);
          cst += cfg.W * al * std::log2(1.0 + g / uj) + cc * uj;
          slope -= cc;
        }
        c.idx.push_back(S.u_idx[k * N + n]);
        c.coef.push_back(-slope);
      }
      // sum slope*u + cst >= N R_min, scaled to O(1).
      const double sc = 1.0 / std::max(1.0, cfg.N * cfg.R_min);
      for (double& v : c.coef) v *= sc;
      c.rhs = (cst - cfg.N * cfg.R_min) * sc;
      P.AddLinearIneq(std::move(c));
    }
  }

  // C7 via the S-procedure; a plain half-plane when the disk is a point.
  for (int e = 0; e < E; ++e) {
    const Eavesdropper& eve = cfg.eavesdroppers[e];
    const Vec2& th = eve.est_position;
    const double Q = eve.radius;
    for (int n = 0; n < N; ++n) {
      const double need = need_eff[e][n];
      if (!(need > 0.0)) continue;
      const Vec2& tj = pt.t_j[n];
      const int tx = S.t_idx[n];
      const double c0 = th.squaredNorm() - tj.squaredNorm() + cfg.H * cfg.H - need;
      const Vec2 ct = 2.0 * (tj - th);
      if (!(Q > 0.0)) {
        P.AddLinearIneq({{tx, tx + 1}, {-ct.x(), -ct.y()}, c0, g_c7});
        continue;
      }
      const int psi = S.psi_idx[e * N + n];
      LmiIneq L;
      L.n = 3;
      L.group = g_c7;
      L.F0 = CMat::Zero(3, 3);
      L.F0(0, 0) = L.F0(1, 1) = 1.0;
      L.F0(0, 2) = L.F0(2, 0) = -th.x();
      L.F0(1, 2) = L.F0(2, 1) = -th.y();
      L.F0(2, 2) = c0;
      CMat Cx = CMat::Zero(3, 3), Cy = CMat::Zero(3, 3), Cp = CMat::Zero(3, 3);
      Cx(0, 2) = Cx(2, 0) = 1.0;
      Cx(2, 2) = ct.x();
      Cy(1, 2) = Cy(2, 1) = 1.0;
      Cy(2, 2) = ct.y();
      Cp(0, 0) = Cp(1, 1) = 1.0;
      Cp(2, 2) = -Q * Q;
      L.scalar_idx = {tx, tx + 1, psi};
      L.scalar_coef = {Cx, Cy, Cp};
      P.AddLmi(std::move(L));
      P.AddLowerBound(psi, 0.0, g_c25);
    }
  }
  return S;
}

VectorXd Sp2StartPoint(const Sp2Program& S, const Sp2ExpansionPoint& pt, const Sp2Inputs& in,
                       const std::vector<std::vector<double>>& need_eff) {
  const ScenarioConfig& cfg = in.cfg;
  const int N = S.N;
  VectorXd x = VectorXd::Zero(S.prob.num_vars());
  for (int n = 0; n < N; ++n) {
    x.segment<2>(S.t_idx[n]) = pt.t_j[n];
    // Shared velocity (ZAI) takes the first slot's value.
    if (!(S.v_idx[n] == S.v_idx[0] && n > 0)) x.segment<2>(S.v_idx[n]) = pt.v_j[n];
  }
  for (int n = 0; n < N; ++n) {
    const Vec2 v = x.segment<2>(S.v_idx[n]);
    const double sp = v.norm();
    const double s = sp * (1.0 + kStartMargin) + kStartMargin;
    x[S.s_idx[n]] = s;
    x[S.w_idx[n]] = s * s * s * (1.0 + kStartMargin) + kStartMargin;
    const double lin = std::sqrt(std::max(0.0, pt.v_j[n].squaredNorm() + 2.0 * pt.v_j[n].dot(v - pt.v_j[n])));
    x[S.ups_idx[n]] = lin - 1e-6 * (lin - kVFloor);
    for (int k = 0; k < S.K; ++k) {
      const double d2 = (pt.t_j[n] - cfg.users[k].position).squaredNorm() + cfg.H * cfg.H;
      x[S.u_idx[k * N + n]] = d2 * (1.0 + kStartMargin);
    }
  }
  for (int e = 0; e < S.E; ++e) {
    const Eavesdropper& eve = cfg.eavesdroppers[e];
    for (int n = 0; n < N; ++n) {
      const int psi = S.psi_idx[e * N + n];
      if (psi < 0) continue;
      const double d = (pt.t_j[n] - eve.est_position).norm();
      const double Q = eve.radius;
      const double slack = RobustDist2(pt.t_j[n], eve, cfg.H) - need_eff[e][n];
      double ps = d / Q - 1.0;
      if (!(ps > 1e-9)) ps = std::min(1e-3, 0.5 * std::max(slack, 0.0) / (Q * Q));
      x[psi] = ps;
    }
  }
  return x;
}

double Sp2Numerator(const Sp2Program& S, const VectorXd& x) {
  double v = S.num_const;
  for (size_t j = 0; j < S.u_idx.size(); ++j) v += S.num_u[j] * x[S.u_idx[j]];
  return v;
}

double Sp2Denominator(const Sp2Program& S, const VectorXd& x, const ScenarioConfig& cfg) {
  const FlightPowerParams& fp = cfg.flight;
  const double bc = BladeCoef(fp), pc = ParasiteCoef(fp);
  double d = S.den_const;
  for (int n = 0; n < S.N; ++n) {
    const Vec2 v = x.segment<2>(S.v_idx[n]);
    d += bc * v.squaredNorm() + fp.P_i * fp.v0 / x[S.ups_idx[n]] + pc * x[S.w_idx[n]];
  }
  return d;
}

Trajectory ExtractTrajectory(const Sp2Program& S, const VectorXd& x, const ScenarioConfig& cfg) {
  Trajectory tr;
  tr.velocities.resize(S.N);
  tr.positions.resize(S.N);
  for (int n = 0; n < S.N; ++n) tr.velocities[n] = x.segment<2>(S.v_idx[n]);
  tr.positions[0] = cfg.t0_I;
  for (int n = 0; n + 1 < S.N; ++n) tr.positions[n + 1] = tr.positions[n] + cfg.tau * tr.velocities[n];
  return tr;
}

namespace {

[[noreturn]] void Infeasible(const std::string& what, double q) {
  throw SubproblemInfeasible("no feasible trajectory: violated " + what, q);
}

// Distance floors no tighter than what the expansion point already meets.
std::vector<std::vector<double>> EffectiveNeed(const Sp2Constants& kc, const Trajectory& tr,
                                               const ScenarioConfig& cfg) {
  std::vector<std::vector<double>> out = kc.need;
  for (int e = 0; e < cfg.E(); ++e) {
    for (int n = 0; n < cfg.N; ++n) {
      if (!(out[e][n] > 0.0)) continue;
      const double have = RobustDist2(tr.positions[n], cfg.eavesdroppers[e], cfg.H);
      out[e][n] = std::min(out[e][n], have * (1.0 - kStartMargin));
    }
  }
  return out;
}

}  // namespace

Sp2Result SolveSp2(const Sp2Inputs& in, const Sp2Params& params, const Trajectory& warm) {
  const ScenarioConfig& cfg = in.cfg;
  for (int n = 0; n < cfg.N; ++n) {
    if ((warm.positions[n] - in.jammer.positions[n]).squaredNorm() <= cfg.d_min * cfg.d_min) {
      Infeasible("C13 (standoff from the jammer UAV) at slot " + std::to_string(n), 0.0);
    }
  }
  LeakagePool own;
  Sp2Inputs inp = in;
  if (!inp.pool && inp.alloc.NJ > 0 && std::isfinite(cfg.Gamma_th)) {
    own = BuildLeakagePool(cfg, in.jammer, 4096, 90001);
    inp.pool = &own;
  }
  const Sp2Constants kc = ComputeSp2Constants(inp, params);
  ChannelSet ch;
  ch.jam = in.jam;
  auto exact_ee = [&](const Trajectory& tr) {
    ch.info = BuildInfoChannels(cfg, tr);
    return EnergyEfficiency(in.alloc, tr, in.jammer, ch, cfg, params.jammer);
  };
  // Exact rate floor, strictly. Uses the channels of the last exact_ee call.
  auto meets_qos = [&] {
    if (!(cfg.R_min > 0.0)) return true;
    for (int k = 0; k < cfg.K(); ++k) {
      double r = 0.0;
      for (int n = 0; n < cfg.N; ++n) {
        for (int i = 0; i < cfg.N_F; ++i) r += UserRate(k, i, n, in.alloc, ch, cfg);
      }
      if (!(r > cfg.N * cfg.R_min)) return false;
    }
    return true;
  };

  Sp2Result res;
  res.info = warm;
  res.q3 = exact_ee(warm);
  res.q3_trace.push_back(res.q3);
  for (int j = 1; j <= params.J_max_outer; ++j) {
    const Sp2ExpansionPoint pt = ExpansionPointFrom(res.info, cfg);
    const auto need = EffectiveNeed(kc, res.info, cfg);
    const double scale = std::max(1e-12, TotalPower(in.alloc, res.info, in.jammer, cfg, params.jammer));
    Sp2Program probe = BuildSp2(res.q3, pt, inp, kc, need, params, scale);
    VectorXd x_warm = Sp2StartPoint(probe, pt, inp, need);
    const std::string bad = probe.prob.FirstViolatedGroup(x_warm);
    if (!bad.empty()) {
      if (j == 1) Infeasible(bad, res.q3);
      break;  // the incumbent sits on a boundary; it is still a valid answer
    }

    double den_scaled = Sp2Denominator(probe, x_warm, cfg) / scale;
    ParametricProgram dk;
    dk.eps2 = params.eps2;
    dk.max_iters = params.max_dinkelbach;
    Sp2Program last;
    dk.evaluate = [&](double q) {
      Sp2Program S = BuildSp2(q, pt, inp, kc, need, params, scale);
      barrier::Options o;
      o.parallel = params.parallel;
      o.mu = 30.0;
      o.gap_abs = std::max(1e-14, 0.25 * params.eps2 * den_scaled);
      o.gap_rel = 0.0;
      const barrier::Result r = barrier::Solve(S.prob, x_warm, o);
      if (r.status == barrier::Status::kInfeasibleStart) Infeasible(r.message, q);
      x_warm = r.x;
      ParametricSolution s;
      s.x = r.x;
      s.N = Sp2Numerator(S, r.x);
      s.D = Sp2Denominator(S, r.x, cfg);
      den_scaled = s.D / scale;
      last = std::move(S);
      return s;
    };
    const RatioResult rr = MaximizeRatio(dk, res.q3);
    res.residuals.push_back(std::abs(rr.residual) / rr.D);
    res.inner_converged.push_back(rr.converged);
    res.sca_iterations = j;
    const Trajectory next = ExtractTrajectory(last, rr.x_best, cfg);
    const double q_next = exact_ee(next);
    // Keep the incumbent when rounding noise would make the trace dip.
    if (!(q_next >= res.q3) || !meets_qos()) break;
    const double q_prev = res.q3;
    res.info = next;
    res.q3 = q_next;
    res.q3_trace.push_back(q_next);
    if (std::abs(q_next - q_prev) <= params.eps3 * std::abs(q_prev)) break;
  }
  return res;
}

}  // namespace uavsec
