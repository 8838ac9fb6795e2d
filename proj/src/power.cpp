#include "uavsec/power.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace uavsec {

AllocationState::AllocationState(int k, int nf, int n, int nj) : K(k), NF(nf), N(n), NJ(nj) {
  alpha.assign(K * NF * N, 0.0);
  p.assign(K * NF * N, 0.0);
  p_tilde.assign(K * NF * N, 0.0);
  Z.assign(NF * N, CMat::Zero(NJ, NJ));
  Z_tilde.assign(K * NF * N, CMat::Zero(NJ, NJ));
}

PowerBreakdown FlightPowerBreakdown(double speed, const FlightPowerParams& fp) {
  if (!(speed >= kVFloor)) {
    std::ostringstream os;
    os << "flight power undefined below v_floor (" << kVFloor << " m/s), got " << speed;
    throw DomainError(os.str());
  }
  PowerBreakdown b;
  const double tip = fp.Omega * fp.r;
  b.blade_profile = fp.P_o * (1.0 + 3.0 * speed * speed / (tip * tip));
  b.induced = fp.P_i * fp.v0 / speed;
  b.parasite = 0.5 * fp.d0 * fp.rho * fp.s * fp.A_r * speed * speed * speed;
  b.total = b.blade_profile + b.induced + b.parasite;
  return b;
}

double FlightPower(double speed, const FlightPowerParams& fp) {
  return FlightPowerBreakdown(speed, fp).total;
}

double FlightPowerDerivative(double speed, const FlightPowerParams& fp) {
  if (!(speed >= kVFloor)) throw DomainError("flight power undefined below v_floor");
  const double tip = fp.Omega * fp.r;
  return 6.0 * fp.P_o * speed / (tip * tip) - fp.P_i * fp.v0 / (speed * speed) +
         1.5 * fp.d0 * fp.rho * fp.s * fp.A_r * speed * speed;
}

double MinPowerSpeed(const FlightPowerParams& fp, double lo, double hi) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = FlightPower(c, fp), fd = FlightPower(d, fp);
  while (b - a > 1e-10) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = FlightPower(c, fp);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = FlightPower(d, fp);
    }
  }
  return 0.5 * (a + b);
}

PowerBreakdown InfoTotalPower(const AllocationState& alloc, int n, const ScenarioConfig& cfg,
                              double info_speed) {
  PowerBreakdown b = FlightPowerBreakdown(info_speed, cfg.flight);
  double comm = 0.0;
  for (int k = 0; k < alloc.K; ++k) {
    for (int i = 0; i < alloc.NF; ++i) comm += alloc.Alpha(k, i, n) * alloc.P(k, i, n);
  }
  b.comm = cfg.zeta_I * comm;
  b.circuit = cfg.P_C_I;
  b.total += b.comm + b.circuit;
  return b;
}

PowerBreakdown JammerTotalPower(const std::vector<CMat>& Z_slot, const ScenarioConfig& cfg,
                                double jammer_speed) {
  double tr = 0.0;
  for (const CMat& Z : Z_slot) {
    if (Z.size() == 0) continue;
    const CMat herm = 0.5 * (Z + Z.adjoint());
    if ((Z - herm).norm() > 1e-9 * (1.0 + Z.norm())) {
      throw std::invalid_argument("noise covariance is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMat> es(herm, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * (1.0 + herm.norm())) {
      throw std::invalid_argument("noise covariance is not positive semidefinite");
    }
    tr += herm.trace().real();
  }
  PowerBreakdown b = FlightPowerBreakdown(jammer_speed, cfg.flight);
  b.comm = cfg.zeta_J * tr;
  b.circuit = cfg.JammerCircuitPower();
  b.total += b.comm + b.circuit;
  return b;
}

}  // namespace uavsec
