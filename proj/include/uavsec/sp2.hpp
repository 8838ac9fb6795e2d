#pragma once

// Information UAV trajectory and velocity for a fixed allocation: distance and
// speed slacks, S-procedure matrix inequalities for the uncertain
// eavesdroppers, SCA outer loop with a Dinkelbach inner loop.

#include <Eigen/Core>

#include <vector>

#include "uavsec/allocation.hpp"
#include "uavsec/barrier.hpp"
#include "uavsec/channel.hpp"
#include "uavsec/fractional.hpp"
#include "uavsec/power.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

struct Sp2Params {
  double eps3 = 1e-4;
  int J_max_outer = 10;
  double eps2 = 1e-6;
  int max_dinkelbach = 10;
  bool zai = false;     // one velocity shared by every slot
  bool jammer = true;   // false drops P_total_J from the denominator
  bool parallel = true;
};

// Expansion point of the first-order surrogates. u_j is indexed [k][n].
struct Sp2ExpansionPoint {
  std::vector<std::vector<double>> u_j;
  std::vector<Vec2> t_j;
  std::vector<Vec2> v_j;
};

Sp2ExpansionPoint ExpansionPointFrom(const Trajectory& info, const ScenarioConfig& cfg);

// W alpha log2(1 + gamma / u).
double RateBarU(double u, double gamma, double alpha, double W);

// Tangent of RateBarU at u_j; a global lower bound since RateBarU is convex in u.
// Throws DomainError if u_j <= 0.
double RateLbU(double u, double u_j, double gamma, double alpha, double W);

// Tangent minorant of ||t - t_jam||^2 at t_j (standoff from the jammer UAV).
double StandoffLb(const Vec2& t, const Vec2& t_j, const Vec2& t_jam);

// Tangent minorant of ||v||^2 at v_j: 2 v_j^T v - ||v_j||^2.
double SpeedSqLb(const Vec2& v, const Vec2& v_j);

// Constant term of the robust leakage-distance inequality with ||t||^2 replaced
// by its tangent at t_j: ||t_hat||^2 + 2 t^T t_j - ||t_j||^2 - 2 t_hat^T t + H^2 - need,
// where need = gamma_worst / Gamma_th.
double SprocCTilde(const Vec2& t, const Vec2& t_j, const Vec2& t_hat, double H, double need);

// [[(psi+1) I, t - t_hat], [(t - t_hat)^T, -psi Q^2 + c~]]. PSD implies
// ||t + d - t_hat||^2 + H^2 (linearized) >= need for every ||d|| <= Q.
Eigen::Matrix3d SprocLmi(const Vec2& t, double psi, const Vec2& t_j, const Vec2& t_hat, double Q,
                         double H, double need);

// Read-only data of one trajectory solve.
struct Sp2Inputs {
  const ScenarioConfig& cfg;
  const AllocationState& alloc;
  const Trajectory& jammer;
  const JammerChannels& jam;
  const LeakagePool* pool = nullptr;  // built on demand when null
};

// Per-slot constants derived from the fixed allocation.
struct Sp2Constants {
  std::vector<std::vector<std::vector<double>>> gamma_u;  // [k][i][n] p beta0 / (jam + W N0)
  std::vector<std::vector<double>> need;                  // [e][n] distance^2 floor, 0 = none
  std::vector<double> comm_circuit;                       // [n] zeta_I sum alpha p + P_C_I
  double jammer_power = 0.0;                              // sum_n P_total_J (0 if excluded)
};

Sp2Constants ComputeSp2Constants(const Sp2Inputs& in, const Sp2Params& params);

// Variable map. Index -1 means absent.
struct Sp2Program {
  barrier::Problem prob;
  int N = 0, K = 0, E = 0;
  std::vector<int> t_idx, v_idx;  // first of two per slot
  std::vector<int> u_idx;         // [k * N + n]
  std::vector<int> ups_idx, s_idx, w_idx;
  std::vector<int> psi_idx;       // [e * N + n]
  double scale = 1.0;
  // Surrogate numerator N(x) = num_const + num_u . u and denominator pieces.
  double num_const = 0.0;
  std::vector<double> num_u;      // [k * N + n]
  double den_const = 0.0;
};

// Convex trajectory program at Dinkelbach parameter q. need_eff replaces Sp2Constants::need
// where the start point would otherwise sit outside the leakage region.
Sp2Program BuildSp2(double q, const Sp2ExpansionPoint& point, const Sp2Inputs& in,
                    const Sp2Constants& k, const std::vector<std::vector<double>>& need_eff,
                    const Sp2Params& params, double scale);

// Strictly feasible start built from the expansion point itself.
Eigen::VectorXd Sp2StartPoint(const Sp2Program& prog, const Sp2ExpansionPoint& point,
                              const Sp2Inputs& in, const std::vector<std::vector<double>>& need_eff);

double Sp2Numerator(const Sp2Program& prog, const Eigen::VectorXd& x);
double Sp2Denominator(const Sp2Program& prog, const Eigen::VectorXd& x, const ScenarioConfig& cfg);

// Positions rebuilt from t[0] and the velocities so C10 holds to rounding.
Trajectory ExtractTrajectory(const Sp2Program& prog, const Eigen::VectorXd& x,
                             const ScenarioConfig& cfg);

struct Sp2Result {
  Trajectory info;
  double q3 = 0.0;                // exact EE of the returned trajectory
  std::vector<double> q3_trace;   // exact EE after each SCA iteration, starting point first
  std::vector<double> residuals;  // |N - qD| / D at each inner convergence
  std::vector<bool> inner_converged;
  int sca_iterations = 0;
};

// SCA loop with inner Dinkelbach from warm. Throws SubproblemInfeasible naming the violated
// group when warm cannot seed the first program.
Sp2Result SolveSp2(const Sp2Inputs& in, const Sp2Params& params, const Trajectory& warm);

}  // namespace uavsec
