#include "uavsec/sp1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "uavsec/metrics.hpp"
#include "uavsec/power.hpp"

namespace uavsec {

namespace {

using barrier::AffineTerm;
using barrier::LinearIneq;
using barrier::LmiIneq;
using barrier::PerspectiveLogTerm;
using barrier::SmoothIneq;
using barrier::SmoothTerm;
using Eigen::VectorXd;

constexpr double kLn2 = std::numbers::ln2;
// Isotropic share mixed into a seed covariance for the frozen-schedule start.
constexpr double kIsoBlend = 1e-6;
// Phase-one SCA passes, and the slack decrease (relative to N R_min) that
// counts as progress.
constexpr int kPhaseOnePasses = 12;
constexpr double kPhaseOneProgress = 1e-3;
// First barrier weight on the slack, per unit of N R_min.
constexpr double kPhaseOneT0 = 100.0;
// Relative headroom on the rate floor so the trajectory stage can start
// strictly inside it.
constexpr double kQosHeadroom = 1e-5;

RateChannel ChannelAt(const Sp1Inputs& in, int k, int n, bool jammer) {
  RateChannel c;
  c.h = in.ch.info.h_IU[k][n];
  if (jammer) {
    c.A = in.ch.jam.A_U[k][n];
    c.H = in.ch.jam.H_JU[k][n];
  }
  return c;
}

double Trace(const CMat& H, const CMat& Z) {
  if (H.size() == 0 || Z.size() == 0) return 0.0;
  return TraceProduct(H, Z);
}

// Everything the builders share.
struct Builder {
  const Sp1Inputs& in;
  const Sp1Params& params;
  int K, NF, N, nj;
  double wn0, Gamma, scale;
  std::vector<double> pfl_i, pfl_j;

  Builder(const Sp1Inputs& inputs, const Sp1Params& p)
      : in(inputs), params(p), K(inputs.cfg.K()), NF(inputs.cfg.N_F), N(inputs.cfg.N),
        nj(p.jammer ? inputs.cfg.NJ() : 0), wn0(inputs.cfg.NoisePower()),
        Gamma(inputs.cfg.Gamma_th) {
    scale = in.cfg.W * K * NF * N;
    for (int n = 0; n < N; ++n) {
      pfl_i.push_back(FlightPower(in.info.velocities[n].norm(), in.cfg.flight));
      pfl_j.push_back(nj > 0 ? FlightPower(in.jammer.velocities[n].norm(), in.cfg.flight) : 0.0);
    }
  }

  int Idx(int k, int i, int n) const { return (n * K + k) * NF + i; }

  double DenomConst() const {
    double d = 0.0;
    for (int n = 0; n < N; ++n) {
      d += in.cfg.P_C_I + pfl_i[n];
      if (nj > 0) d += in.cfg.JammerCircuitPower() + pfl_j[n];
    }
    return d;
  }
};

// Linearized D^II in the normalized form W alpha log2(1 + a T / alpha).
struct D2Lin {
  double value = 0.0, d_alpha = 0.0, d_T = 0.0, alpha_j = 1.0, T_j = 0.0;
};

D2Lin LinearizeD2(double alpha_j, double T_j, double a, double W) {
  D2Lin l;
  l.alpha_j = alpha_j;
  l.T_j = T_j;
  const double r = a * T_j / alpha_j;
  l.value = W * alpha_j * std::log2(1.0 + r);
  l.d_alpha = W * (std::log2(1.0 + r) - r / ((1.0 + r) * kLn2));
  l.d_T = W * a / ((1.0 + r) * kLn2);
  return l;
}

struct Program {
  Sp1Program out;
  std::vector<std::shared_ptr<SmoothTerm>> rate_parts;
  VectorXd d_lin;
  double d_const = 0.0;
  VectorXd center;

  double Numerator(const VectorXd& x) const {
    double s = 0.0, v;
    for (const auto& t : rate_parts) {
      if (t->Eval(x, &v, nullptr, nullptr)) s += v;
    }
    return s;
  }
  double Denominator(const VectorXd& x) const { return d_const + d_lin.dot(x.head(d_lin.size())); }
};

struct Groups {
  int c1b, c2, c3a, c3b, c4a, c4b, c5a, c5b, c6, c7, c14, c15, c16, c17, c18, c19, c20, c21, phase;
  explicit Groups(barrier::Problem& p) {
    c1b = p.AddGroup("C1b");
    c2 = p.AddGroup("C2");
    c3a = p.AddGroup("C3a");
    c3b = p.AddGroup("C3b");
    c4a = p.AddGroup("C4a");
    c4b = p.AddGroup("C4b");
    c5a = p.AddGroup("C5a");
    c5b = p.AddGroup("C5b");
    c6 = p.AddGroup("C6");
    c7 = p.AddGroup("C7");
    c14 = p.AddGroup("C14");
    c15 = p.AddGroup("C15");
    c16 = p.AddGroup("C16");
    c17 = p.AddGroup("C17");
    c18 = p.AddGroup("C18");
    c19 = p.AddGroup("C19");
    c20 = p.AddGroup("C20");
    c21 = p.AddGroup("C21");
    phase = p.AddGroup("phase");
  }
};

LmiIneq MakeLmi(int nj, const CMat& F0, int group) {
  LmiIneq L;
  L.n = nj;
  L.F0 = F0;
  L.group = group;
  return L;
}

// Shared construction. sched == nullptr builds the relaxed program.
Program Build(double q, const Sp1ExpansionPoint* point, const std::vector<int>* sched,
              const std::vector<CMat>* Z_j, const Sp1Inputs& in, const Sp1Params& params,
              bool phase1) {
  Builder B(in, params);
  const ScenarioConfig& cfg = in.cfg;
  const int K = B.K, NF = B.NF, N = B.N, nj = B.nj, hd = nj * nj;
  Program P;
  Sp1Program& S = P.out;
  barrier::Problem& prob = S.prob;
  Groups G(prob);
  S.K = K;
  S.NF = NF;
  S.N = N;
  S.nj = nj;
  S.fixed = sched != nullptr;
  S.scale = B.scale;
  const int total = K * NF * N;
  S.a_idx.assign(total, -1);
  S.p_idx.assign(total, -1);
  S.pt_idx.assign(total, -1);
  S.zt_off.assign(total, -1);
  S.z_off.assign(NF * N, -1);
  if (sched) S.scheduled = *sched;

  // Variables, one block per (i, n).
  std::vector<int> starts;
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < NF; ++i) {
      starts.push_back(prob.num_vars());
      if (!sched) {
        for (int k = 0; k < K; ++k) {
          const int id = B.Idx(k, i, n);
          S.a_idx[id] = prob.AddVariables(1);
          S.p_idx[id] = prob.AddVariables(1);
          S.pt_idx[id] = prob.AddVariables(1);
          if (nj > 0) S.zt_off[id] = prob.AddVariables(hd);
        }
        if (nj > 0) S.z_off[n * NF + i] = prob.AddVariables(hd);
      } else {
        const int s = (*sched)[n * NF + i];
        if (nj > 0) S.z_off[n * NF + i] = prob.AddVariables(hd);
        if (s >= 0) {
          const int id = B.Idx(s, i, n);
          S.p_idx[id] = prob.AddVariables(1);
          S.pt_idx[id] = S.p_idx[id];
          S.zt_off[id] = S.z_off[n * NF + i];
        }
      }
    }
  }
  const bool need_c6 = cfg.R_min > 0.0;
  if (phase1) {
    if (!need_c6) throw std::logic_error("phase one requested without a QoS constraint");
    starts.push_back(prob.num_vars());
    S.phase_var = prob.AddVariables(1);
  }
  starts.push_back(prob.num_vars());
  prob.SetBlocks(starts);
  const int nv = prob.num_vars();

  const VectorXd tcI = nj > 0 ? barrier::TraceCoeffs(CMat::Identity(nj, nj)) : VectorXd();
  const double PI = cfg.P_peak_I, PJ = cfg.P_peak_J;

  // Per (k,i,n) constraints and rate pieces.
  std::vector<SmoothIneq> c6(K);
  for (int k = 0; k < K; ++k) c6[k].group = G.c6;
  P.d_lin = VectorXd::Zero(nv);
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < NF; ++i) {
      const int zo = S.z_off[n * NF + i];
      LinearIneq c2{{}, {}, 1.0, G.c2};
      for (int k = 0; k < K; ++k) {
        const int id = B.Idx(k, i, n);
        const int a = S.a_idx[id], p = S.p_idx[id], pt = S.pt_idx[id], zt = S.zt_off[id];
        if (p < 0) continue;
        const RateChannel rc = ChannelAt(in, k, n, nj > 0);
        if (!S.fixed) {
          prob.AddLowerBound(a, 0.0, G.c1b);
          prob.AddUpperBound(a, 1.0, G.c1b);
          c2.idx.push_back(a);
          c2.coef.push_back(1.0);
          prob.AddLinearIneq({{pt, p}, {1.0, -1.0}, 0.0, G.c14});
          prob.AddLinearIneq({{p, pt, a}, {1.0, -1.0, PI}, PI, G.c15});
          prob.AddLowerBound(pt, 0.0, G.c16);
          prob.AddLinearIneq({{pt, a}, {1.0, -PI}, 0.0, G.c17});
          if (nj > 0) {
            LmiIneq c18 = MakeLmi(nj, CMat::Zero(nj, nj), G.c18);
            c18.herm_offset = {zo, zt};
            c18.herm_sign = {1.0, -1.0};
            prob.AddLmi(c18);
            LmiIneq c19 = MakeLmi(nj, PJ * CMat::Identity(nj, nj), G.c19);
            c19.scalar_idx = {a};
            c19.scalar_coef = {-PJ * CMat::Identity(nj, nj)};
            c19.herm_offset = {zt, zo};
            c19.herm_sign = {1.0, -1.0};
            prob.AddLmi(c19);
            LmiIneq c20 = MakeLmi(nj, CMat::Zero(nj, nj), G.c20);
            c20.herm_offset = {zt};
            c20.herm_sign = {1.0};
            prob.AddLmi(c20);
            LmiIneq c21 = MakeLmi(nj, CMat::Zero(nj, nj), G.c21);
            c21.scalar_idx = {a};
            c21.scalar_coef = {PJ * CMat::Identity(nj, nj)};
            c21.herm_offset = {zt};
            c21.herm_sign = {-1.0};
            prob.AddLmi(c21);
          }
        } else {
          prob.AddUpperBound(p, PI, G.c17);
        }
        prob.AddLowerBound(p, 0.0, G.c3a);

        // C~7 at every uncertainty sample, normalized by W N0.
        if (std::isfinite(B.Gamma)) {
          for (int e = 0; e < cfg.E(); ++e) {
            const double hw = in.ch.info.h_IE_worst[e][n] / B.wn0;
            if (nj == 0) {
              prob.AddLinearIneq({{p}, {hw}, B.Gamma, G.c7});
              continue;
            }
            for (int g = 0; g < in.ch.jam.G; ++g) {
              const VectorXd tc = barrier::TraceCoeffs(in.ch.jam.H_JE[e][g][n]) *
                                  (B.Gamma * in.ch.jam.A_E[e][g][n] / B.wn0);
              LinearIneq row{{p}, {hw}, B.Gamma, G.c7};
              for (int r = 0; r < hd; ++r) {
                row.idx.push_back(zo + r);
                row.coef.push_back(-tc[r]);
              }
              prob.AddLinearIneq(row);
            }
          }
          for (const LeakageCut& cut : in.ch.jam.cuts) {
            if (cut.n != n || nj == 0) continue;
            const double hw = in.ch.info.h_IE_worst[cut.e][n] / B.wn0;
            const VectorXd tc = barrier::TraceCoeffs(cut.H) * (B.Gamma * cut.A / B.wn0);
            LinearIneq row{{p}, {hw}, B.Gamma, G.c7};
            for (int r = 0; r < hd; ++r) {
              row.idx.push_back(zo + r);
              row.coef.push_back(-tc[r]);
            }
            prob.AddLinearIneq(row);
          }
        }

        // Rate lower bound: D^I (perspective log) minus linearized D^II.
        const double hp = rc.h / B.wn0;
        const double aa = nj > 0 ? rc.A / B.wn0 : 0.0;
        const VectorXd tcH = nj > 0 ? barrier::TraceCoeffs(rc.H) : VectorXd();
        std::vector<int> yidx{pt};
        VectorXd gy(1 + hd);
        gy[0] = hp;
        for (int r = 0; r < hd; ++r) {
          yidx.push_back(zt + r);
          gy[1 + r] = aa * tcH[r];
        }
        const double Wl = cfg.W / kLn2;
        std::shared_ptr<SmoothTerm> d1, d2;
        double alpha_j = 1.0, T_j = 0.0;
        if (!S.fixed) {
          alpha_j = point->alpha_j[id];
          if (!(alpha_j > 0.0)) throw DomainError("expansion point alpha_j must be positive");
          T_j = nj > 0 ? Trace(rc.H, point->Z_tilde_j[id]) : 0.0;
          d1 = std::make_shared<PerspectiveLogTerm>(a, yidx, gy, 0.0, Wl);
        } else {
          T_j = nj > 0 ? Trace(rc.H, (*Z_j)[n * NF + i]) : 0.0;
          d1 = std::make_shared<PerspectiveLogTerm>(1.0, yidx, gy, 0.0, Wl);
        }
        if (nj > 0) {
          const D2Lin l = LinearizeD2(alpha_j, std::max(T_j, 0.0), aa, cfg.W);
          // -(value + d_alpha (alpha - alpha_j) + d_T (T - T_j))
          std::vector<int> lidx;
          std::vector<double> lco;
          double c0 = -(l.value - l.d_alpha * l.alpha_j - l.d_T * l.T_j);
          if (!S.fixed) {
            lidx.push_back(a);
            lco.push_back(-l.d_alpha);
          } else {
            c0 -= l.d_alpha * 1.0;
          }
          for (int r = 0; r < hd; ++r) {
            lidx.push_back(zt + r);
            lco.push_back(-l.d_T * tcH[r]);
          }
          d2 = std::make_shared<AffineTerm>(lidx, Eigen::Map<VectorXd>(lco.data(), lco.size()), c0);
        }
        P.rate_parts.push_back(d1);
        if (d2) P.rate_parts.push_back(d2);
        if (need_c6) {
          c6[k].terms.push_back(d1);
          if (d2) c6[k].terms.push_back(d2);
        }
        if (!phase1) {
          // Scaled copies for the objective.
          prob.AddObjectiveTerm(
              S.fixed ? std::static_pointer_cast<SmoothTerm>(
                            std::make_shared<PerspectiveLogTerm>(1.0, yidx, gy, 0.0, Wl / B.scale))
                      : std::static_pointer_cast<SmoothTerm>(std::make_shared<PerspectiveLogTerm>(
                            a, yidx, gy, 0.0, Wl / B.scale)));
          if (d2) {
            // Affine part goes into the linear objective directly.
            const auto& idx = d2->idx();
            VectorXd gz;
            barrier::MatrixXd hz;
            double v0;
            d2->Eval(VectorXd::Zero(nv), &v0, &gz, &hz);
            for (size_t r = 0; r < idx.size(); ++r) prob.AddLinearObjective(idx[r], gz[r] / B.scale);
            prob.AddObjectiveConstant(v0 / B.scale);
          }
          if (!S.fixed && params.chi >= 0.0) {
            // -chi * (alpha (1 - 2 alpha_j) + alpha_j^2)
            const double chi = params.chi > 0.0 ? params.chi : DefaultChi(cfg);
            prob.AddLinearObjective(a, -chi * (1.0 - 2.0 * alpha_j) / B.scale);
            prob.AddObjectiveConstant(-chi * alpha_j * alpha_j / B.scale);
          }
        }
        P.d_lin[pt] += cfg.zeta_I;
      }
      if (!S.fixed) prob.AddLinearIneq(c2);
      if (nj > 0) {
        for (int r = 0; r < hd; ++r) P.d_lin[zo + r] += cfg.zeta_J * tcI[r];
        if (S.fixed) {
          LmiIneq c3b = MakeLmi(nj, CMat::Zero(nj, nj), G.c3b);
          c3b.herm_offset = {zo};
          c3b.herm_sign = {1.0};
          prob.AddLmi(c3b);
        }
      }
    }
    // Per-slot budgets.
    LinearIneq c4a{{}, {}, PI, G.c4a};
    LinearIneq c5a{{}, {}, cfg.P_max_I - cfg.P_C_I - B.pfl_i[n], G.c5a};
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < NF; ++i) {
        const int pt = S.pt_idx[B.Idx(k, i, n)];
        if (pt < 0) continue;
        c4a.idx.push_back(pt);
        c4a.coef.push_back(1.0);
        c5a.idx.push_back(pt);
        c5a.coef.push_back(cfg.zeta_I);
      }
    }
    if (!c4a.idx.empty()) {
      prob.AddLinearIneq(c4a);
      prob.AddLinearIneq(c5a);
    }
    if (nj > 0) {
      LinearIneq c4b{{}, {}, PJ, G.c4b};
      LinearIneq c5b{{}, {}, cfg.P_max_J - cfg.JammerCircuitPower() - B.pfl_j[n], G.c5b};
      for (int i = 0; i < NF; ++i) {
        for (int r = 0; r < hd; ++r) {
          c4b.idx.push_back(S.z_off[n * NF + i] + r);
          c4b.coef.push_back(tcI[r]);
          c5b.idx.push_back(S.z_off[n * NF + i] + r);
          c5b.coef.push_back(cfg.zeta_J * tcI[r]);
        }
      }
      prob.AddLinearIneq(c4b);
      prob.AddLinearIneq(c5b);
    }
  }
  P.d_const = B.DenomConst();
  if (need_c6) {
    const double req = N * cfg.R_min * (1.0 + kQosHeadroom);
    for (int k = 0; k < K; ++k) {
      std::vector<int> none;
      if (phase1) {
        c6[k].terms.push_back(
            std::make_shared<AffineTerm>(std::vector<int>{S.phase_var}, VectorXd::Ones(1), -req));
      } else {
        c6[k].terms.push_back(std::make_shared<AffineTerm>(none, VectorXd(), -req));
      }
      prob.AddSmoothIneq(c6[k]);
    }
  }
  if (phase1) {
    const double req = N * cfg.R_min;
    prob.AddLinearObjective(S.phase_var, -1.0 / req);
    prob.AddLowerBound(S.phase_var, -req, G.phase);
  } else {
    for (int v = 0; v < nv; ++v) {
      if (P.d_lin[v] != 0.0) prob.AddLinearObjective(v, -q * P.d_lin[v] / B.scale);
    }
    prob.AddObjectiveConstant(-q * P.d_const / B.scale);
  }
  return P;
}

// Strictly interior point of the relaxed program.
VectorXd RelaxedCenter(const Program& P, const Sp1Inputs& in, const Sp1Params& params) {
  const Sp1Program& S = P.out;
  const ScenarioConfig& cfg = in.cfg;
  VectorXd x = VectorXd::Zero(S.prob.num_vars());
  const int K = S.K, NF = S.NF, N = S.N, nj = S.nj, hd = nj * nj;
  const double al = 1.0 / (K + 1);
  const double eps = nj > 0 ? 0.25 * cfg.P_peak_J / (NF * nj) : 0.0;
  const double wn0 = cfg.NoisePower();
  (void)params;
  for (int n = 0; n < N; ++n) {
    double hmax = 0.0;
    for (int e = 0; e < cfg.E(); ++e) hmax = std::max(hmax, in.ch.info.h_IE_worst[e][n] / wn0);
    double p = 0.25 * cfg.P_peak_I / (K * NF);
    const double budget = (cfg.P_max_I - cfg.P_C_I -
                           FlightPower(in.info.velocities[n].norm(), cfg.flight)) /
                          std::max(cfg.zeta_I, 1e-12);
    if (budget > 0.0) p = std::min(p, 0.25 * budget / (K * NF));
    if (std::isfinite(cfg.Gamma_th) && hmax > 0.0) p = std::min(p, 0.5 * cfg.Gamma_th / hmax);
    for (int i = 0; i < NF; ++i) {
      if (nj > 0) {
        for (int r = 0; r < nj; ++r) x[S.z_off[n * NF + i] + r] = eps;
      }
      for (int k = 0; k < K; ++k) {
        const int id = (n * K + k) * NF + i;
        x[S.a_idx[id]] = al;
        x[S.p_idx[id]] = p;
        x[S.pt_idx[id]] = al * p;
        if (nj > 0) {
          for (int r = 0; r < nj; ++r) x[S.zt_off[id] + r] = al * eps;
          (void)hd;
        }
      }
    }
  }
  return x;
}

// Interior point of the frozen-schedule program seeded from a previous solution.
VectorXd FixedCenter(const Program& P, const Sp1Inputs& in, const AllocationState& seed) {
  const Sp1Program& S = P.out;
  const ScenarioConfig& cfg = in.cfg;
  VectorXd x = VectorXd::Zero(S.prob.num_vars());
  const int K = S.K, NF = S.NF, N = S.N, nj = S.nj, hd = nj * nj;
  const double wn0 = cfg.NoisePower();
  for (int n = 0; n < N; ++n) {
    std::vector<CMat> Zs(NF);
    double tr_sum = 0.0;
    for (int i = 0; i < NF; ++i) {
      if (nj == 0) continue;
      const CMat Zh = 0.5 * (seed.Zm(i, n) + seed.Zm(i, n).adjoint());
      // Tiny isotropic floor: strictly inside the cone without undoing nulls.
      Zs[i] = (1.0 - kIsoBlend) * Zh + kIsoBlend * (0.25 * cfg.P_peak_J / (NF * nj)) * CMat::Identity(nj, nj);
      tr_sum += Zs[i].trace().real();
    }
    const double tr_cap =
        std::min(cfg.P_peak_J, (cfg.P_max_J - cfg.JammerCircuitPower() -
                                FlightPower(in.jammer.velocities[n].norm(), cfg.flight)) /
                                   std::max(cfg.zeta_J, 1e-12));
    const double zs = tr_sum > 0.95 * tr_cap ? 0.95 * tr_cap / tr_sum : 1.0;
    std::vector<double> ps(NF * K, 0.0);
    double psum = 0.0;
    for (int i = 0; i < NF; ++i) {
      if (nj > 0) {
        Zs[i] *= zs;
        barrier::HermToParams(Zs[i], x.data() + S.z_off[n * NF + i]);
      }
      const int s = S.scheduled[n * NF + i];
      if (s < 0) continue;
      double limit = cfg.P_peak_I;
      if (std::isfinite(cfg.Gamma_th)) {
        for (int e = 0; e < cfg.E(); ++e) {
          const double hw = in.ch.info.h_IE_worst[e][n] / wn0;
          if (hw <= 0.0) continue;
          if (nj == 0) {
            limit = std::min(limit, cfg.Gamma_th / hw);
            continue;
          }
          for (int g = 0; g < in.ch.jam.G; ++g) {
            const double jam = in.ch.jam.A_E[e][g][n] * TraceProduct(in.ch.jam.H_JE[e][g][n], Zs[i]) / wn0;
            limit = std::min(limit, cfg.Gamma_th * (1.0 + jam) / hw);
          }
        }
        for (const LeakageCut& cut : in.ch.jam.cuts) {
          if (cut.n != n || nj == 0) continue;
          const double hw = in.ch.info.h_IE_worst[cut.e][n] / wn0;
          if (hw <= 0.0) continue;
          const double jam = cut.A * TraceProduct(cut.H, Zs[i]) / wn0;
          limit = std::min(limit, cfg.Gamma_th * (1.0 + jam) / hw);
        }
      }
      const double p = std::min(std::max(seed.P(s, i, n), 1e-3 * limit), 0.9 * limit);
      ps[i * K + s] = p;
      psum += p;
    }
    const double pcap =
        std::min(cfg.P_peak_I, (cfg.P_max_I - cfg.P_C_I -
                                FlightPower(in.info.velocities[n].norm(), cfg.flight)) /
                                   std::max(cfg.zeta_I, 1e-12));
    const double ps_scale = psum > 0.9 * pcap ? 0.9 * pcap / psum : 1.0;
    for (int i = 0; i < NF; ++i) {
      const int s = S.scheduled[n * NF + i];
      if (s < 0) continue;
      x[S.p_idx[(n * K + s) * NF + i]] = ps[i * K + s] * ps_scale;
    }
    (void)hd;
  }
  return x;
}

// den_scaled is the ratio denominator over the objective divisor. A quarter of
// the Dinkelbach tolerance leaves room for the residual test.
barrier::Options SolverOptions(const Sp1Params& params, double den_scaled) {
  barrier::Options o;
  o.parallel = params.parallel;
  o.t0 = 1.0;
  o.mu = 30.0;
  o.gap_abs = std::max(1e-14, 0.25 * params.eps2 * den_scaled);
  o.gap_rel = 0.0;
  return o;
}

[[noreturn]] void Infeasible(const std::string& what) {
  throw SubproblemInfeasible("no feasible allocation: violated " + what, 0.0);
}

// Finds a strictly feasible point for the QoS rows by minimizing a shared
// slack. The rate bounds are re-linearized after every pass, since one tangent
// cannot see the gain of moving a null onto a starved user.
VectorXd PhaseOne(const Program& main, const std::function<Program(const VectorXd*)>& build_phase,
                  const VectorXd& x0, const Sp1Inputs& in, const Sp1Params& params) {
  const ScenarioConfig& cfg = in.cfg;
  const double req = cfg.N * cfg.R_min * (1.0 + kQosHeadroom);
  // Already strictly feasible?
  if (main.out.prob.FirstViolatedGroup(x0).empty()) return x0;
  const double target = -1e-3 * req;
  VectorXd cur = x0;
  double best = INFINITY;
  for (int pass = 0; pass < kPhaseOnePasses; ++pass) {
    Program ph = build_phase(pass == 0 ? nullptr : &cur);
    const int sv = ph.out.phase_var;
    VectorXd x = VectorXd::Zero(ph.out.prob.num_vars());
    x.head(cur.size()) = cur;
    // Slack large enough for every user.
    double worst = 0.0;
    for (const auto& c : ph.out.prob.smooth()) {
      if (c.group != ph.out.prob.smooth().back().group) continue;
      double s = 0.0, v;
      for (size_t t = 0; t + 1 < c.terms.size(); ++t) {
        c.terms[t]->Eval(x, &v, nullptr, nullptr);
        s += v;
      }
      worst = std::max(worst, req - s);
    }
    x[sv] = worst + 0.1 * req;
    const std::string bad = ph.out.prob.FirstViolatedGroup(x);
    if (!bad.empty()) Infeasible(bad);
    barrier::Options o = SolverOptions(params, 1.0);
    o.gap_abs = 1e-9;
    // The central path can climb before it descends; keep the lowest slack seen.
    VectorXd low = x;
    o.t0 = kPhaseOneT0 / std::max(req, 1e-12);
    o.stop = [&low, sv, target](const VectorXd& z) {
      if (z[sv] < low[sv]) low = z;
      return z[sv] < target;
    };
    const barrier::Result r = barrier::Solve(ph.out.prob, x, o);
    if (r.x[sv] < low[sv]) low = r.x;
    const double slack = low[sv];
    cur = low.head(cur.size());
    if (slack < target) return cur;
    if (slack > best - kPhaseOneProgress * req) break;
    best = std::min(best, slack);
  }
  Infeasible("C6 (minimum rate)");
}

}  // namespace

Sp1ExpansionPoint InitialExpansionPoint(const ScenarioConfig& cfg, double scale) {
  Sp1ExpansionPoint pt;
  const int K = cfg.K(), total = K * cfg.N_F * cfg.N, nj = cfg.NJ();
  pt.alpha_j.assign(total, 1.0 / K);
  pt.Z_tilde_j.assign(total,
                      (scale * cfg.P_peak_J / (2.0 * cfg.N_F * nj * K)) * CMat::Identity(nj, nj));
  return pt;
}

double DefaultChi(const ScenarioConfig& cfg) {
  const double snr = cfg.P_peak_I * cfg.beta0 / (cfg.H * cfg.H * cfg.NoisePower());
  return 10.0 * cfg.N * cfg.K() * cfg.N_F * cfg.W * std::log2(1.0 + snr);
}

double D2Value(double alpha, const CMat& Z_tilde, const RateChannel& c,
               const ScenarioConfig& cfg) {
  const double T = Trace(c.H, Z_tilde);
  return cfg.W * alpha * std::log2(c.A * T / alpha + cfg.NoisePower());
}

D2Gradient D2Grad(double alpha_j, const CMat& Z_tilde_j, const RateChannel& c,
                  const ScenarioConfig& cfg) {
  if (!(alpha_j > 0.0)) throw DomainError("alpha_j must be positive");
  const double T = Trace(c.H, Z_tilde_j);
  const double wn0 = cfg.NoisePower();
  const double den = (c.A * T + wn0 * alpha_j) * kLn2;
  D2Gradient g;
  g.d_alpha = cfg.W * std::log2(c.A * T / alpha_j + wn0) - cfg.W * c.A * T / den;
  g.d_Z = (cfg.W * alpha_j * c.A / den) * c.H.transpose();
  return g;
}

double ExactRateTilde(double alpha, double p_tilde, const CMat& Z_tilde, const RateChannel& c,
                      const ScenarioConfig& cfg) {
  if (alpha <= 0.0) return 0.0;
  const double T = Trace(c.H, Z_tilde);
  const double wn0 = cfg.NoisePower();
  const double d1 = cfg.W * alpha * std::log2(wn0 + (c.A * T + p_tilde * c.h) / alpha);
  return d1 - D2Value(alpha, Z_tilde, c, cfg);
}

double DcLowerBoundRate(double alpha_j, const CMat& Z_tilde_j, double alpha, double p_tilde,
                        const CMat& Z_tilde, const RateChannel& c, const ScenarioConfig& cfg) {
  if (!(alpha_j > 0.0)) throw DomainError("alpha_j must be positive");
  const double wn0 = cfg.NoisePower();
  const double T = Trace(c.H, Z_tilde);
  const double d1 =
      alpha > 0.0 ? cfg.W * alpha * std::log2(wn0 + (c.A * T + p_tilde * c.h) / alpha) : 0.0;
  const D2Gradient g = D2Grad(alpha_j, Z_tilde_j, c, cfg);
  double dz = 0.0;
  if (c.H.size() > 0) {
    const CMat dZ = Z_tilde - Z_tilde_j;
    for (int r = 0; r < dZ.rows(); ++r) {
      for (int q = 0; q < dZ.cols(); ++q) dz += (g.d_Z(r, q) * dZ(r, q)).real();
    }
  }
  const double ub = D2Value(alpha_j, Z_tilde_j, c, cfg) + g.d_alpha * (alpha - alpha_j) + dz;
  return d1 - ub;
}

double PenaltyUpperBound(double alpha_j, double alpha) {
  return alpha - alpha_j * alpha_j - 2.0 * alpha_j * (alpha - alpha_j);
}

Sp1Program BuildSp1(double q, const Sp1ExpansionPoint& point, const Sp1Inputs& in,
                    const Sp1Params& params, bool phase1) {
  return Build(q, &point, nullptr, nullptr, in, params, phase1).out;
}

Sp1Program BuildSp1Fixed(double q, const std::vector<int>& scheduled,
                         const std::vector<CMat>& Z_j, const Sp1Inputs& in,
                         const Sp1Params& params, bool phase1) {
  return Build(q, nullptr, &scheduled, &Z_j, in, params, phase1).out;
}

AllocationState ExtractAllocation(const Sp1Program& S, const VectorXd& x, int NJ) {
  AllocationState a(S.K, S.NF, S.N, NJ);
  for (int n = 0; n < S.N; ++n) {
    for (int i = 0; i < S.NF; ++i) {
      if (S.nj > 0) {
        a.Zm(i, n) = barrier::HermFromParams(x.data() + S.z_off[n * S.NF + i], S.nj);
      }
      for (int k = 0; k < S.K; ++k) {
        const int id = a.Idx(k, i, n);
        if (S.p_idx[id] < 0) continue;
        a.p[id] = std::max(0.0, x[S.p_idx[id]]);
        if (S.fixed) {
          a.alpha[id] = 1.0;
          a.p_tilde[id] = a.p[id];
          if (S.nj > 0) a.Z_tilde[id] = a.Zm(i, n);
        } else {
          a.alpha[id] = x[S.a_idx[id]];
          a.p_tilde[id] = x[S.pt_idx[id]];
          if (S.nj > 0) a.Z_tilde[id] = barrier::HermFromParams(x.data() + S.zt_off[id], S.nj);
        }
      }
    }
  }
  return a;
}

namespace {

struct StageOutput {
  VectorXd x;
  Program prog;
  std::vector<double> q_trace;
  std::vector<double> residuals;
  std::vector<bool> converged;
  int iterations = 0;
};

// SCA outer loop with Dinkelbach inside. make(q, x) builds the program around
// the expansion point extracted from x (x empty on the first pass).
StageOutput RunSca(const std::function<Program(double, const VectorXd*)>& make,
                   const std::function<Program(const VectorXd*)>& make_phase,
                   const std::function<VectorXd(const Program&)>& center, const Sp1Inputs& in,
                   const Sp1Params& params, int max_iters,
                   const std::function<bool()>& on_stall = nullptr) {
  StageOutput out;
  Program first = make(0.0, nullptr);
  const VectorXd c0 = center(first);
  {
    const std::string bad = first.out.prob.FirstViolatedGroup(c0);
    if (!bad.empty() && bad != "C6") Infeasible(bad);
  }
  VectorXd x = c0;
  if (in.cfg.R_min > 0.0) {
    x = PhaseOne(first, make_phase, c0, in, params);
  }
  double q = 0.0, q_prev = 0.0;
  double den_scale = 0.0;
  const VectorXd* pt = nullptr;
  VectorXd pt_store;
  for (int j = 1; j <= max_iters; ++j) {
    VectorXd x_warm = x;
    ParametricProgram dk;
    dk.eps2 = params.eps2;
    dk.max_iters = params.max_dinkelbach;
    Program last;
    dk.evaluate = [&](double qq) {
      Program P = make(qq, pt);
      // Pull the warm start slightly toward the analytic centre.
      const VectorXd cen = center(P);
      if (den_scale <= 0.0) den_scale = P.Denominator(cen) / P.out.scale;
      barrier::Options o = SolverOptions(params, den_scale);
      VectorXd xs = 0.99 * x_warm + 0.01 * cen;
      if (!P.out.prob.FirstViolatedGroup(xs).empty()) xs = x_warm;
      const barrier::Result r = barrier::Solve(P.out.prob, xs, o);
      if (r.status == barrier::Status::kInfeasibleStart) Infeasible(r.message);
      x_warm = r.x;
      ParametricSolution s;
      s.x = r.x;
      s.N = P.Numerator(r.x);
      s.D = P.Denominator(r.x);
      den_scale = s.D / P.out.scale;
      last = std::move(P);
      return s;
    };
    const RatioResult rr = MaximizeRatio(dk, std::max(q, 0.0));
    out.residuals.push_back(std::abs(rr.residual) / rr.D);
    out.converged.push_back(rr.converged);
    x = rr.x_best;
    q = rr.N / rr.D;
    out.q_trace.push_back(q);
    out.iterations = j;
    out.prog = std::move(last);
    pt_store = x;
    pt = &pt_store;
    const bool stalled =
        j > 1 && std::abs(q - q_prev) <= params.eps1 * std::max(std::abs(q), 1e-300);
    q_prev = q;
    if (stalled || j == max_iters / 2) {
      // The caller may tighten the model (penalty switch) instead of stopping.
      if (on_stall && on_stall()) {
        q_prev = -1.0;
        continue;
      }
      if (stalled) break;
    }
  }
  out.x = x;
  return out;
}

Sp1ExpansionPoint PointFrom(const Program& P, const VectorXd& x, const ScenarioConfig& cfg) {
  const AllocationState a = ExtractAllocation(P.out, x, P.out.nj);
  Sp1ExpansionPoint pt;
  pt.alpha_j = a.alpha;
  for (double& v : pt.alpha_j) v = std::clamp(v, 1e-9, 1.0);
  pt.Z_tilde_j = a.Z_tilde;
  (void)cfg;
  return pt;
}

double AllocationEe(const AllocationState& a, const Sp1Inputs& in, const Sp1Params& params) {
  return EnergyEfficiency(a, in.info, in.jammer, in.ch, in.cfg, params.jammer);
}

AllocationState ZeroAllocation(const ScenarioConfig& cfg) {
  return AllocationState(cfg.K(), cfg.N_F, cfg.N, cfg.NJ());
}

std::vector<int> RoundSchedule(const AllocationState& a, double threshold, bool use_threshold) {
  std::vector<int> sched(a.NF * a.N, -1);
  for (int n = 0; n < a.N; ++n) {
    for (int i = 0; i < a.NF; ++i) {
      int best = -1;
      double bv = -1.0;
      for (int k = 0; k < a.K; ++k) {
        const double v = a.Alpha(k, i, n);
        if (use_threshold && v < threshold) continue;
        if (v > bv) {
          bv = v;
          best = k;
        }
      }
      sched[n * a.NF + i] = best;
    }
  }
  return sched;
}

// Gives every user fewer than m scheduled slots its m best ones, ranked by
// relaxed alpha and then by channel gain. Users already holding m keep theirs.
std::vector<int> ReserveForQos(std::vector<int> sched, const AllocationState& a,
                               const ChannelSet& ch, int m) {
  std::vector<int> held(a.K, 0);
  for (int s : sched) {
    if (s >= 0) ++held[s];
  }
  for (int k = 0; k < a.K; ++k) {
    if (held[k] >= m) continue;
    std::vector<int> order(a.NF * a.N);
    for (size_t b = 0; b < order.size(); ++b) order[b] = static_cast<int>(b);
    auto score = [&](int b) {
      const int n = b / a.NF, i = b % a.NF;
      return std::make_pair(a.Alpha(k, i, n), ch.info.h_IU[k][n]);
    };
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return score(x) > score(y); });
    for (int b : order) {
      if (held[k] >= m) break;
      if (sched[b] == k) continue;
      // Never strip another user below its own reservation.
      if (sched[b] >= 0 && held[sched[b]] <= m) continue;
      if (sched[b] >= 0) --held[sched[b]];
      sched[b] = k;
      ++held[k];
    }
  }
  return sched;
}

// Principal component of every jamming covariance. The barrier leaves a small
// full-rank residue; dropping it only lowers jamming power and interference.
AllocationState RankOneJamming(const AllocationState& a) {
  AllocationState b = a;
  for (int n = 0; n < a.N; ++n) {
    for (int i = 0; i < a.NF; ++i) {
      const CMat& Z = a.Zm(i, n);
      if (Z.size() == 0 || !(Z.trace().real() > 0.0)) continue;
      Eigen::SelfAdjointEigenSolver<CMat> es(Z);
      const int top = static_cast<int>(Z.rows()) - 1;
      const double l1 = std::max(0.0, es.eigenvalues()[top]);
      const CVec v = es.eigenvectors().col(top);
      CMat R = l1 * v * v.adjoint();
      R = 0.5 * (R + R.adjoint());
      b.Zm(i, n) = R;
      for (int k = 0; k < a.K; ++k) {
        const int id = a.Idx(k, i, n);
        if (a.p[id] > 0.0 && a.alpha[id] == 1.0) b.Z_tilde[id] = R;
      }
    }
  }
  return b;
}

// Cuts at the weakest-jamming disk points where p h_worst <= Gamma (jam + W N0)
// fails; one per violating subcarrier, merged when they land together.
std::vector<LeakageCut> FindLeakageCuts(const AllocationState& a, const Sp1Inputs& in,
                                        const LeakagePool& pool, double tol) {
  const ScenarioConfig& cfg = in.cfg;
  std::vector<LeakageCut> out;
  const double wn0 = cfg.NoisePower();
  for (int e = 0; e < cfg.E(); ++e) {
    for (int n = 0; n < cfg.N; ++n) {
      const double hw = in.ch.info.h_IE_worst[e][n];
      std::vector<Vec2> spots;
      for (int i = 0; i < cfg.N_F; ++i) {
        double p = 0.0;
        for (int k = 0; k < cfg.K(); ++k) p = std::max(p, a.P(k, i, n));
        if (p <= 0.0) continue;
        Vec2 pos;
        const double jam = DiskJamMin(pool, cfg, in.jammer, e, n, a.Zm(i, n), &pos);
        if (p * hw <= cfg.Gamma_th * (jam + wn0) * (1.0 + tol)) continue;
        bool dup = false;
        for (const Vec2& q : spots) dup = dup || (q - pos).norm() < 0.5;
        if (!dup) spots.push_back(pos);
      }
      for (const Vec2& pos : spots) {
        LeakageCut c;
        c.e = e;
        c.n = n;
        c.position = pos;
        c.A = PathGain(in.jammer.positions[n], pos, cfg.H, cfg.beta0);
        c.H = JammerChannelMatrix(SteeringVector(in.jammer.positions[n], pos, cfg.array, cfg.H));
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

Sp1Result FixedStage(const Sp1Inputs& in, const Sp1Params& params, const std::vector<int>& sched,
                     const AllocationState& seed) {
  const int NJ = in.cfg.NJ();
  const int nj = params.jammer ? NJ : 0;
  std::vector<CMat> Zj(in.cfg.N_F * in.cfg.N);
  for (int n = 0; n < in.cfg.N; ++n) {
    for (int i = 0; i < in.cfg.N_F; ++i) Zj[n * in.cfg.N_F + i] = nj > 0 ? seed.Zm(i, n) : CMat();
  }
  // First linearization at the start point's own covariances, so every rate
  // bound is tight there; near-zero seeds otherwise give tangents so steep
  // that the start sits far below the QoS rows.
  if (nj > 0) {
    const Program probe = Build(0.0, nullptr, &sched, &Zj, in, params, false);
    const VectorXd c = FixedCenter(probe, in, seed);
    for (size_t b = 0; b < Zj.size(); ++b) {
      Zj[b] = barrier::HermFromParams(c.data() + probe.out.z_off[b], nj);
    }
  }
  auto z_from = [&](const Program& P, const VectorXd* x) {
    if (!x || nj == 0) return Zj;
    std::vector<CMat> Z(Zj.size());
    for (size_t b = 0; b < Z.size(); ++b) Z[b] = barrier::HermFromParams(x->data() + P.out.z_off[b], nj);
    return Z;
  };
  std::shared_ptr<Program> shape;
  auto make = [&](double q, const VectorXd* x) {
    const std::vector<CMat> Z = shape ? z_from(*shape, x) : Zj;
    Program P = Build(q, nullptr, &sched, &Z, in, params, false);
    if (!shape) shape = std::make_shared<Program>(Build(0.0, nullptr, &sched, &Zj, in, params, false));
    return P;
  };
  auto make_phase = [&](const VectorXd* x) {
    const std::vector<CMat> Z = shape ? z_from(*shape, x) : Zj;
    return Build(0.0, nullptr, &sched, &Z, in, params, true);
  };
  auto center = [&](const Program& P) { return FixedCenter(P, in, seed); };
  StageOutput st = RunSca(make, make_phase, center, in, params, params.fixed_sca_iters);
  Sp1Result res;
  res.alloc = ExtractAllocation(st.prog.out, st.x, NJ);
  res.q1 = AllocationEe(res.alloc, in, params);
  res.q1_trace = st.q_trace;
  res.residuals = st.residuals;
  res.inner_converged = st.converged;
  res.sca_iterations = st.iterations;
  return res;
}

}  // namespace

Sp1Result SolveSp1Fixed(const Sp1Inputs& in, const Sp1Params& params,
                        const std::vector<int>& scheduled) {
  // Seed: zero powers are lifted to a feasible fraction inside FixedCenter.
  AllocationState seed = ZeroAllocation(in.cfg);
  const int nj = params.jammer ? in.cfg.NJ() : 0;
  for (int n = 0; n < in.cfg.N; ++n) {
    for (int i = 0; i < in.cfg.N_F; ++i) {
      if (nj > 0) seed.Zm(i, n) = (0.25 * in.cfg.P_peak_J / (in.cfg.N_F * nj)) * CMat::Identity(nj, nj);
      const int s = scheduled[n * in.cfg.N_F + i];
      if (s >= 0) seed.P(s, i, n) = in.cfg.P_peak_I / (in.cfg.K() * in.cfg.N_F);
    }
  }
  return FixedStage(in, params, scheduled, seed);
}

Sp1Result SolveSp1(const Sp1Inputs& in, const Sp1Params& params, const AllocationState* warm) {
  const ScenarioConfig& cfg = in.cfg;
  if (cfg.P_peak_I <= 0.0) {
    if (cfg.R_min > 0.0) Infeasible("C6 (minimum rate) with zero transmit power");
    Sp1Result r;
    r.alloc = ZeroAllocation(cfg);
    r.q1 = 0.0;
    r.q1_trace = {0.0};
    return r;
  }
  Sp1Params prm = params;
  if (cfg.NJ() == 0 || cfg.P_peak_J <= 0.0) prm.jammer = false;

  Sp1ExpansionPoint init = InitialExpansionPoint(cfg, prm.init_noise_scale);
  if (warm) {
    for (size_t id = 0; id < init.alpha_j.size(); ++id) {
      init.alpha_j[id] = std::clamp(warm->alpha[id], 0.05, 0.95);
      if (prm.jammer) {
        init.Z_tilde_j[id] = warm->Z_tilde[id] + 1e-3 * init.Z_tilde_j[id];
      }
    }
  }
  std::shared_ptr<Program> shape;
  // Rate-only SCA first; the scheduling penalty joins once it stalls.
  Sp1Params relaxed_prm = prm;
  relaxed_prm.chi = -1.0;
  bool penalty_on = false;
  auto on_stall = [&] {
    if (penalty_on) return false;
    penalty_on = true;
    relaxed_prm.chi = prm.chi;
    return true;
  };
  auto make = [&](double q, const VectorXd* x) {
    Sp1ExpansionPoint pt = init;
    if (x && shape) pt = PointFrom(*shape, *x, cfg);
    Program P = Build(q, &pt, nullptr, nullptr, in, relaxed_prm, false);
    if (!shape) shape = std::make_shared<Program>(Build(0.0, &init, nullptr, nullptr, in, prm, false));
    return P;
  };
  auto make_phase = [&](const VectorXd* x) {
    Sp1ExpansionPoint pt = init;
    if (x && shape) pt = PointFrom(*shape, *x, cfg);
    return Build(0.0, &pt, nullptr, nullptr, in, prm, true);
  };
  auto center = [&](const Program& P) { return RelaxedCenter(P, in, prm); };
  StageOutput st = RunSca(make, make_phase, center, in, prm, prm.J_max_outer, on_stall);
  const AllocationState relaxed = ExtractAllocation(st.prog.out, st.x, cfg.NJ());

  // Frozen-schedule solve followed by exchange rounds: leakage rows at the
  // weakest-jamming pool points.
  LeakagePool own_pool;
  const LeakagePool* pool = in.pool;
  const bool exchange = std::isfinite(cfg.Gamma_th) && prm.jammer && prm.max_cut_rounds > 0;
  if (exchange && !pool) {
    own_pool = BuildLeakagePool(cfg, in.jammer, prm.leak_pool, prm.leak_seed);
    pool = &own_pool;
  }
  std::vector<LeakageCut> new_cuts;
  auto solve_schedule = [&](const std::vector<int>& sched) {
    new_cuts.clear();
    Sp1Result res = FixedStage(in, prm, sched, relaxed);
    ChannelSet local = in.ch;
    for (int round = 0; exchange && round < prm.max_cut_rounds; ++round) {
      const Sp1Inputs cur{cfg, local, in.info, in.jammer, pool};
      const std::vector<LeakageCut> cuts = FindLeakageCuts(res.alloc, cur, *pool, prm.cut_tol);
      if (cuts.empty()) break;
      local.jam.cuts.insert(local.jam.cuts.end(), cuts.begin(), cuts.end());
      new_cuts.insert(new_cuts.end(), cuts.begin(), cuts.end());
      const Sp1Inputs tight{cfg, local, in.info, in.jammer, pool};
      Sp1Result next = FixedStage(tight, prm, sched, res.alloc);
      next.q1_trace.insert(next.q1_trace.begin(), res.q1_trace.begin(), res.q1_trace.end());
      next.residuals.insert(next.residuals.begin(), res.residuals.begin(), res.residuals.end());
      next.inner_converged.insert(next.inner_converged.begin(), res.inner_converged.begin(),
                                  res.inner_converged.end());
      res = std::move(next);
    }
    if (prm.jammer) {
      const AllocationState r1 = RankOneJamming(res.alloc);
      const Sp1Inputs cur{cfg, local, in.info, in.jammer, pool};
      if (!exchange || FindLeakageCuts(r1, cur, *pool, prm.cut_tol).empty()) {
        res.alloc = r1;
        res.q1 = AllocationEe(r1, in, prm);
      }
    }
    return res;
  };

  // Threshold rounding, then largest-alpha, then QoS repair with a growing
  // number of reserved slots per user.
  std::vector<std::vector<int>> tries{RoundSchedule(relaxed, prm.round_threshold, true)};
  const std::vector<int> largest = RoundSchedule(relaxed, prm.round_threshold, false);
  if (largest != tries[0]) tries.push_back(largest);
  if (cfg.R_min > 0.0) {
    const int share = std::max(1, cfg.N * cfg.N_F / cfg.K());
    for (int m = 1;; m = std::min(2 * m, share)) {
      tries.push_back(ReserveForQos(largest, relaxed, in.ch, m));
      if (m == share) break;
    }
  }
  Sp1Result res;
  bool fallback = false;
  for (size_t t = 0; t < tries.size(); ++t) {
    try {
      res = solve_schedule(tries[t]);
      fallback = t > 0;
      break;
    } catch (const SubproblemInfeasible&) {
      if (t + 1 == tries.size()) throw;
    }
  }
  res.cuts = std::move(new_cuts);
  res.rounding_fallback = fallback;
  // Relaxed-stage trace first, then the frozen-schedule passes.
  std::vector<double> trace = st.q_trace;
  trace.insert(trace.end(), res.q1_trace.begin(), res.q1_trace.end());
  res.q1_trace = trace;
  std::vector<double> resid = st.residuals;
  resid.insert(resid.end(), res.residuals.begin(), res.residuals.end());
  res.residuals = resid;
  std::vector<bool> conv = st.converged;
  conv.insert(conv.end(), res.inner_converged.begin(), res.inner_converged.end());
  res.inner_converged = conv;
  res.sca_iterations = st.iterations;
  return res;
}

}  // namespace uavsec
