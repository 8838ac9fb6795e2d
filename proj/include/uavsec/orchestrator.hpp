#pragma once

// Alternating optimization of allocation and trajectory, the baseline
// schemes and parameter sweeps.

#include <cstdint>
#include <string>
#include <vector>

#include "uavsec/metrics.hpp"
#include "uavsec/scenario.hpp"
#include "uavsec/sp1.hpp"
#include "uavsec/sp2.hpp"

namespace uavsec {

enum class Scheme { kPA, kNJ, kSAJ, kZAI, kSLI, kPerfectCsi };

std::string ToString(Scheme s);
// Accepts PA, NJ, SAJ, ZAI, SLI, PERFECT_CSI. Throws std::invalid_argument.
Scheme SchemeFromString(const std::string& name);

struct RunSettings {
  Scheme scheme = Scheme::kPA;
  double eps4 = 1e-3;
  int J_max_A4 = 5;
  uint64_t seed = 1;  // audit sampling and leakage-search pool
  int G = 9;          // uncertainty samples per eavesdropper
  Sp1Params sp1;
  Sp2Params sp2;
  AuditOptions audit;
};

std::string SerializeRunSettings(const RunSettings& s);
// Missing keys keep their defaults. Throws ParseError.
RunSettings ParseRunSettings(const std::string& json_text);

// Operation counts of the complexity expression (M1, N1, M2, N2).
struct ComplexityCounts {
  long long M1 = 0, N1 = 0, M2 = 0, N2 = 0;
};
ComplexityCounts CountComplexity(const ScenarioConfig& cfg);

enum class RunStatus { kConverged, kMaxIterations, kInfeasible, kInfeasibleAtAudit, kError };
std::string ToString(RunStatus s);

struct SolveReport {
  Scheme scheme = Scheme::kPA;
  ScenarioConfig cfg;  // after scheme adjustments
  RunStatus status = RunStatus::kError;
  std::string phase;    // sub-problem that failed, if any
  std::string message;
  AllocationState alloc;
  Trajectory info;
  Trajectory jammer;
  double ee = 0.0;
  std::vector<double> ee_trace;      // after each outer iteration
  std::vector<double> ee_after_sp1;  // per outer iteration
  std::vector<std::vector<double>> sp1_traces, sp2_traces;
  std::vector<double> residuals;  // every Dinkelbach stop, relative to D
  std::vector<bool> inner_converged;
  int outer_iterations = 0;
  int leakage_cuts = 0;
  AuditResult audit;
  ComplexityCounts complexity;

  bool Feasible() const {
    return status == RunStatus::kConverged || status == RunStatus::kMaxIterations;
  }
};

// Scenario as seen by a scheme: SAJ uses a 1x1 array, PERFECT_CSI zero radii.
ScenarioConfig ApplyScheme(const ScenarioConfig& cfg, Scheme scheme);

// Outer alternation loop for the scheme in settings (PA, NJ, SAJ, ZAI, PERFECT_CSI),
// or the fixed-path allocation for SLI.
SolveReport AlternateOptimize(const ScenarioConfig& cfg, const RunSettings& settings);

// Same as AlternateOptimize; kept as the scheme-level entry point.
SolveReport RunBaseline(const ScenarioConfig& cfg, const RunSettings& settings);

// Sweepable parameters: P_peak_I, P_peak_J, Q_e (every radius), Q_<e> (one
// radius, 1-based), N_J (square array side^2), K (first K users), T (N = T/tau).
ScenarioConfig ApplySweepValue(const ScenarioConfig& cfg, const std::string& param, double value);

struct SweepPoint {
  std::string param;
  double value = 0.0;
  SolveReport report;
};

std::vector<SweepPoint> RunSweep(const ScenarioConfig& cfg, const RunSettings& settings,
                                 const std::string& param, const std::vector<double>& values);

}  // namespace uavsec
