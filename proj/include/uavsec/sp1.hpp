#pragma once

// Scheduling, transmit power and artificial-noise covariance for a fixed pair
// of trajectories: penalty + DC surrogate, SCA outer loop, Dinkelbach inner loop.

#include <cstdint>
#include <vector>

#include "uavsec/allocation.hpp"
#include "uavsec/barrier.hpp"
#include "uavsec/channel.hpp"
#include "uavsec/fractional.hpp"
#include "uavsec/power.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

struct Sp1Params {
  double chi = 0.0;  // <= 0 selects DefaultChi
  double eps1 = 1e-4;
  int J_max_outer = 10;
  double eps2 = 1e-6;
  int max_dinkelbach = 10;
  double round_threshold = 0.5;
  int fixed_sca_iters = 4;  // SCA passes of the power re-solve after rounding
  bool jammer = true;       // false forces Z = 0 and drops jammer power (NJ)
  bool parallel = true;
  // Multiplier on the initial expansion covariance Z~_j.
  double init_noise_scale = 1e-6;
  // Dense leakage search after the frozen-schedule solve.
  int leak_pool = 4096;
  uint64_t leak_seed = 90001;
  int max_cut_rounds = 10;
  double cut_tol = 1e-4;
};

// (alpha_j, Z~_j) indexed like AllocationState::Idx.
struct Sp1ExpansionPoint {
  std::vector<double> alpha_j;
  std::vector<CMat> Z_tilde_j;
};

// Uniform alpha_j = 1/K and Z~_j = scale * P_peak_J / (2 N_F N_J K) I.
Sp1ExpansionPoint InitialExpansionPoint(const ScenarioConfig& cfg, double scale = 1.0);

// chi = 10 N K N_F W log2(1 + SNR_ref), SNR_ref = P_peak_I beta0 / (H^2 W N0).
double DefaultChi(const ScenarioConfig& cfg);

// Scalar pieces of one (k,i,n) rate. T = Re Tr(H Z~) and h the info gain.
struct RateChannel {
  double h = 0.0;       // h_k^IU[n]
  double A = 0.0;       // A_k^U[n]
  CMat H;               // H_k^JU[n] (empty without jammer)
};

// D^II = W alpha log2(A Tr(H Z~)/alpha + W N0).
double D2Value(double alpha, const CMat& Z_tilde, const RateChannel& c, const ScenarioConfig& cfg);

struct D2Gradient {
  double d_alpha = 0.0;
  CMat d_Z;  // entry (r,c) multiplies {Z~ - Z~_j}_{r,c}
};
D2Gradient D2Grad(double alpha_j, const CMat& Z_tilde_j, const RateChannel& c,
                  const ScenarioConfig& cfg);

// Exact D^I - D^II.
double ExactRateTilde(double alpha, double p_tilde, const CMat& Z_tilde, const RateChannel& c,
                      const ScenarioConfig& cfg);

// D^I minus the affine upper bound of D^II at (alpha_j, Z~_j). Throws
// DomainError if alpha_j <= 0.
double DcLowerBoundRate(double alpha_j, const CMat& Z_tilde_j, double alpha, double p_tilde,
                        const CMat& Z_tilde, const RateChannel& c, const ScenarioConfig& cfg);

// alpha - alpha_j^2 - 2 alpha_j (alpha - alpha_j); dominates alpha - alpha^2.
double PenaltyUpperBound(double alpha_j, double alpha);

// Read-only data shared by every program of one sub-problem solve.
struct Sp1Inputs {
  const ScenarioConfig& cfg;
  const ChannelSet& ch;
  const Trajectory& info;
  const Trajectory& jammer;
  const LeakagePool* pool = nullptr;  // built on demand when null
};

// Variable map of one convex program. Index -1 means "not a variable".
struct Sp1Program {
  barrier::Problem prob;
  int K = 0, NF = 0, N = 0, nj = 0;
  bool fixed = false;
  std::vector<int> a_idx, p_idx, pt_idx, zt_off;  // per (k,i,n)
  std::vector<int> z_off;                         // per (i,n)
  std::vector<int> scheduled;                     // fixed mode: user per (i,n) or -1
  int phase_var = -1;
  double scale = 1.0;  // objective divisor
};

// Relaxed program at Dinkelbach parameter q around the expansion point.
// phase1 swaps the objective for a QoS feasibility search.
Sp1Program BuildSp1(double q, const Sp1ExpansionPoint& point, const Sp1Inputs& in,
                    const Sp1Params& params, bool phase1 = false);

// Power/covariance program with the schedule frozen (alpha binary).
Sp1Program BuildSp1Fixed(double q, const std::vector<int>& scheduled,
                         const std::vector<CMat>& Z_j, const Sp1Inputs& in,
                         const Sp1Params& params, bool phase1 = false);

AllocationState ExtractAllocation(const Sp1Program& prog, const Eigen::VectorXd& x, int NJ);

struct Sp1Result {
  AllocationState alloc;
  double q1 = 0.0;                  // EE of the returned (rounded) allocation
  std::vector<double> q1_trace;     // per SCA iteration of the relaxed stage
  std::vector<double> residuals;    // |N - qD| / D at each inner convergence
  std::vector<bool> inner_converged;
  int sca_iterations = 0;
  bool rounding_fallback = false;
  std::vector<LeakageCut> cuts;  // leakage rows added by the dense search
};

// Full pipeline: relaxed SCA + Dinkelbach, rounding, frozen-schedule re-solve.
// warm, when given, seeds the expansion point.
Sp1Result SolveSp1(const Sp1Inputs& in, const Sp1Params& params,
                   const AllocationState* warm = nullptr);

// Frozen-schedule stage alone (also used by the enumeration oracle).
Sp1Result SolveSp1Fixed(const Sp1Inputs& in, const Sp1Params& params,
                        const std::vector<int>& scheduled);

}  // namespace uavsec
