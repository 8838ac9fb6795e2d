#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace uavsec {

using Vec2 = Eigen::Vector2d;

struct GroundUser {
  Vec2 position = Vec2::Zero();
};

struct Eavesdropper {
  Vec2 est_position = Vec2::Zero();
  double radius = 0.0;  // Q_e, meters
};

struct ArrayParams {
  int N_Jx = 2;
  int N_Jy = 2;
  double delta_J = 0.1;
  double lambda_c = 0.2;

  int NJ() const { return N_Jx * N_Jy; }
};

// Rotary-wing propulsion model coefficients.
struct FlightPowerParams {
  double Omega = 300.0;
  double r = 0.4;
  double rho = 1.225;
  double s = 0.05;
  double A_r = 0.503;
  double P_o = 79.86;
  double P_i = 88.63;
  double v0 = 4.03;
  double d0 = 0.3;
};

// Positions and velocities per slot. positions[n+1] = positions[n] + tau * velocities[n].
struct Trajectory {
  std::vector<Vec2> positions;
  std::vector<Vec2> velocities;

  int size() const { return static_cast<int>(positions.size()); }
};

enum class JammerKind { kCSA, kCEA, kSFE, kCA };

std::string ToString(JammerKind kind);
JammerKind JammerKindFromString(const std::string& name);

struct JammerPlan {
  JammerKind kind = JammerKind::kCEA;
  double speed = 10.4;
  // Orbit centre. Derived for CSA (service-area centre) and CEA (centroid);
  // user supplied for CA; unused for SFE.
  Vec2 center = Vec2::Zero();
  double radius = 159.0;
  Trajectory trajectory;  // materialized, never serialized
};

struct ScenarioConfig {
  std::vector<GroundUser> users;
  std::vector<Eavesdropper> eavesdroppers;
  double H = 100.0;
  int N = 20;
  double tau = 0.1;
  int N_F = 4;
  double W = 7800.0;
  double N0 = 1e-19;
  double beta0 = 1e-5;
  ArrayParams array;
  FlightPowerParams flight;
  double P_C_I = 1.0;
  double P_C_J = 1.0;
  // When positive, jammer circuit power is N_J times this value instead of P_C_J.
  double P_C_J_per_antenna = 0.0;
  double zeta_I = 2.0;
  double zeta_J = 2.0;
  double P_peak_I = 1.0;
  double P_peak_J = 1.0;
  double P_max_I = 3162.2776601683795;
  double P_max_J = 3162.2776601683795;
  double R_min = 0.0;
  double Gamma_th = 1e-3;
  double V_max_I = 30.0;
  double V_acc_I = 4.0;
  double d_min = 1.0;
  Vec2 t0_I = Vec2::Zero();
  Vec2 tF_I = Vec2::Zero();
  // Service rectangle [xmin, ymin, xmax, ymax].
  Eigen::Vector4d service_area{0.0, 0.0, 500.0, 500.0};
  JammerPlan jammer_plan;

  int K() const { return static_cast<int>(users.size()); }
  int E() const { return static_cast<int>(eavesdroppers.size()); }
  int NJ() const { return array.NJ(); }
  double NoisePower() const { return W * N0; }
  double JammerCircuitPower() const;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws ValidationError naming the first violated invariant.
void ValidateScenario(const ScenarioConfig& cfg);

// Parses JSON text, validates and materializes the jammer trajectory.
ScenarioConfig ParseScenario(const std::string& text);
ScenarioConfig LoadScenario(const std::string& path);
std::string SerializeScenario(const ScenarioConfig& cfg);

Trajectory GenerateJammerTrajectory(const ScenarioConfig& cfg);

// Straight-line, constant-velocity path from t0_I to tF_I (SFF).
Trajectory InitialInfoTrajectory(const ScenarioConfig& cfg);

// Field-wise equality of everything that is serialized.
bool SameConfig(const ScenarioConfig& a, const ScenarioConfig& b);

// Canonical desk-scale mission used by the tests and the shipped config.
ScenarioConfig CanonicalDeskScenario();

}  // namespace uavsec
