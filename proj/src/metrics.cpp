#include "uavsec/metrics.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace uavsec {

double UserRate(int k, int i, int n, const AllocationState& a, const ChannelSet& ch,
                const ScenarioConfig& cfg) {
  const double alpha = a.Alpha(k, i, n);
  if (alpha <= 0.0) return 0.0;
  double interf = 0.0;
  if (a.NJ > 0) interf = ch.jam.A_U[k][n] * TraceProduct(ch.jam.H_JU[k][n], a.Zm(i, n));
  const double sinr = a.P(k, i, n) * ch.info.h_IU[k][n] / (interf + cfg.NoisePower());
  return cfg.W * alpha * std::log2(1.0 + sinr);
}

double LeakageSinr(int k, int i, int n, const AllocationState& a, const Vec2& eve_position,
                   const Vec2& info_pos, const Vec2& jammer_pos, const ScenarioConfig& cfg) {
  const double h_ie = PathGain(info_pos, eve_position, cfg.H, cfg.beta0);
  double jam = 0.0;
  if (a.NJ > 0) {
    const CVec h = SteeringVector(jammer_pos, eve_position, cfg.array, cfg.H);
    jam = PathGain(jammer_pos, eve_position, cfg.H, cfg.beta0) *
          (h.adjoint() * a.Zm(i, n) * h)(0, 0).real();
  }
  return a.P(k, i, n) * h_ie / (jam + cfg.NoisePower());
}

double TotalRate(const AllocationState& a, const ChannelSet& ch, const ScenarioConfig& cfg) {
  double r = 0.0;
  for (int n = 0; n < a.N; ++n) {
    for (int k = 0; k < a.K; ++k) {
      for (int i = 0; i < a.NF; ++i) r += UserRate(k, i, n, a, ch, cfg);
    }
  }
  return r;
}

double TotalPower(const AllocationState& a, const Trajectory& info, const Trajectory& jammer,
                  const ScenarioConfig& cfg, bool include_jammer) {
  double total = 0.0;
  for (int n = 0; n < a.N; ++n) {
    total += InfoTotalPower(a, n, cfg, info.velocities[n].norm()).total;
    if (include_jammer) {
      std::vector<CMat> zs;
      for (int i = 0; i < a.NF; ++i) {
        if (a.NJ > 0) zs.push_back(a.Zm(i, n));
      }
      total += JammerTotalPower(zs, cfg, jammer.velocities[n].norm()).total;
    }
  }
  return total;
}

double EnergyEfficiency(const AllocationState& a, const Trajectory& info,
                        const Trajectory& jammer, const ChannelSet& ch, const ScenarioConfig& cfg,
                        bool include_jammer) {
  return TotalRate(a, ch, cfg) / TotalPower(a, info, jammer, cfg, include_jammer);
}

bool AuditResult::AllPass() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

bool AuditResult::AllPassExcept(const std::vector<std::string>& names) const {
  for (const auto& c : checks) {
    if (c.pass) continue;
    if (std::find(names.begin(), names.end(), c.name) == names.end()) return false;
  }
  return true;
}

const ConstraintCheck* AuditResult::Find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

std::string Where(const char* fmt, int a, int b = -1, int c = -1) {
  std::ostringstream os;
  os << fmt << "[" << a;
  if (b >= 0) os << "," << b;
  if (c >= 0) os << "," << c;
  os << "]";
  return os.str();
}

// Keeps the smallest margin seen.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  std::string where;
  void Add(double m, const std::string& w) {
    if (m < margin) {
      margin = m;
      where = w;
    }
  }
};

ConstraintCheck Make(const std::string& name, const Worst& w, double tol) {
  ConstraintCheck c;
  c.name = name;
  c.margin = std::isfinite(w.margin) ? w.margin : 0.0;
  c.pass = !(w.margin < -tol);
  c.worst = w.where;
  return c;
}

}  // namespace

AuditResult Audit(const AllocationState& a, const Trajectory& info, const Trajectory& jammer,
                  const ScenarioConfig& cfg, const AuditOptions& opt) {
  AuditResult res;
  const int N = a.N, K = a.K, NF = a.NF;
  const double tol = opt.tol_rel;
  const ChannelSet ch = BuildChannelSet(cfg, info, jammer, 1);

  Worst c1, c2, c3a, c3b, c4a, c4b, c5a, c5b, c6, c7, c8, c9, c10, c11, c12, c13;
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < NF; ++i) {
      double s = 0.0;
      for (int k = 0; k < K; ++k) {
        const double al = a.Alpha(k, i, n);
        c1.Add(-std::abs(al - std::round(al)), Where("alpha", k, i, n));
        c3a.Add(a.P(k, i, n), Where("p", k, i, n));
        s += al;
      }
      c2.Add(1.0 - s, Where("slot/subcarrier", n, i));
      if (a.NJ > 0) {
        const CMat herm = 0.5 * (a.Zm(i, n) + a.Zm(i, n).adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
        const double scale = std::max(cfg.P_peak_J, 1e-300);
        c3b.Add(es.eigenvalues().minCoeff() / scale, Where("Z", i, n));
      }
    }
    double pi_sum = 0.0, tr_sum = 0.0;
    for (int k = 0; k < K; ++k) {
      for (int i = 0; i < NF; ++i) pi_sum += a.Alpha(k, i, n) * a.P(k, i, n);
    }
    for (int i = 0; i < NF; ++i) {
      if (a.NJ > 0) tr_sum += a.Zm(i, n).trace().real();
    }
    const double ppi = std::max(cfg.P_peak_I, 1e-300), ppj = std::max(cfg.P_peak_J, 1e-300);
    c4a.Add((cfg.P_peak_I - pi_sum) / ppi, Where("slot", n));
    c4b.Add((cfg.P_peak_J - tr_sum) / ppj, Where("slot", n));
    const double pti = InfoTotalPower(a, n, cfg, info.velocities[n].norm()).total;
    c5a.Add((cfg.P_max_I - pti) / cfg.P_max_I, Where("slot", n));
    std::vector<CMat> zs;
    if (a.NJ > 0) {
      for (int i = 0; i < NF; ++i) zs.push_back(a.Zm(i, n));
    }
    const double ptj = JammerTotalPower(zs, cfg, jammer.velocities[n].norm()).total;
    c5b.Add((cfg.P_max_J - ptj) / cfg.P_max_J, Where("slot", n));
  }

  res.min_user_rate = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    double r = 0.0;
    for (int n = 0; n < N; ++n) {
      for (int i = 0; i < NF; ++i) r += UserRate(k, i, n, a, ch, cfg);
    }
    r /= N;
    res.min_user_rate = std::min(res.min_user_rate, r);
    const double m = cfg.R_min > 0.0 ? (r - cfg.R_min) / cfg.R_min : r;
    c6.Add(m, Where("user", k));
  }

  // Leakage by dense sampling of each disk.
  double max_ratio = 0.0;
  for (int e = 0; e < cfg.E(); ++e) {
    const auto pts = DiskSamples(cfg.eavesdroppers[e], opt.samples_per_eve, opt.seed + e);
    for (int n = 0; n < N; ++n) {
      for (const Vec2& pe : pts) {
        const double h_ie = PathGain(info.positions[n], pe, cfg.H, cfg.beta0);
        CVec hj;
        double ae = 0.0;
        if (a.NJ > 0) {
          hj = SteeringVector(jammer.positions[n], pe, cfg.array, cfg.H);
          ae = PathGain(jammer.positions[n], pe, cfg.H, cfg.beta0);
        }
        for (int i = 0; i < NF; ++i) {
          double pmax = 0.0;
          for (int k = 0; k < K; ++k) pmax = std::max(pmax, a.P(k, i, n));
          if (pmax <= 0.0) continue;
          double jam = 0.0;
          if (a.NJ > 0) jam = ae * (hj.adjoint() * a.Zm(i, n) * hj)(0, 0).real();
          const double sinr = pmax * h_ie / (jam + cfg.NoisePower());
          const double ratio = sinr / cfg.Gamma_th;
          if (ratio > max_ratio) max_ratio = ratio;
          c7.Add(1.0 - ratio, Where("eve/slot/subcarrier", e, n, i));
        }
      }
    }
  }
  res.max_leakage_sinr = max_ratio * cfg.Gamma_th;

  const double pos_scale = 1.0 + cfg.t0_I.norm() + cfg.tF_I.norm();
  c8.Add(-(info.positions.front() - cfg.t0_I).norm() / pos_scale, "t[0]");
  c9.Add(-(info.positions.back() - cfg.tF_I).norm() / pos_scale, "t[N-1]");
  for (int n = 0; n + 1 < N; ++n) {
    const double err =
        (info.positions[n + 1] - info.positions[n] - cfg.tau * info.velocities[n]).norm();
    c10.Add(-err, Where("slot", n));
  }
  for (int n = 0; n < N; ++n) {
    c11.Add((cfg.V_max_I - info.velocities[n].norm()) / cfg.V_max_I, Where("slot", n));
    if (n + 1 < N) {
      const double dv = (info.velocities[n + 1] - info.velocities[n]).norm();
      c12.Add((cfg.V_acc_I - dv) / std::max(cfg.V_acc_I, 1.0), Where("slot", n));
    }
    const double d2 = (info.positions[n] - jammer.positions[n]).squaredNorm();
    c13.Add(d2 - cfg.d_min * cfg.d_min, Where("slot", n));
  }

  res.checks.push_back(Make("C1", c1, tol));
  res.checks.push_back(Make("C2", c2, tol));
  res.checks.push_back(Make("C3a", c3a, tol * std::max(cfg.P_peak_I, 1e-12)));
  res.checks.push_back(Make("C3b", c3b, 1e-9));
  res.checks.push_back(Make("C4a", c4a, tol));
  res.checks.push_back(Make("C4b", c4b, tol));
  res.checks.push_back(Make("C5a", c5a, tol));
  res.checks.push_back(Make("C5b", c5b, tol));
  res.checks.push_back(Make("C6", c6, tol));
  res.checks.push_back(Make("C7", c7, opt.tol_leak));
  res.checks.push_back(Make("C8", c8, opt.tol_kin));
  res.checks.push_back(Make("C9", c9, opt.tol_kin));
  res.checks.push_back(Make("C10", c10, opt.tol_kin));
  res.checks.push_back(Make("C11", c11, tol));
  res.checks.push_back(Make("C12", c12, tol));
  res.checks.push_back(Make("C13", c13, tol * std::max(1.0, cfg.d_min * cfg.d_min)));
  return res;
}

}  // namespace uavsec
