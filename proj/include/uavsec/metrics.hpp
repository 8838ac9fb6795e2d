#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uavsec/allocation.hpp"
#include "uavsec/channel.hpp"
#include "uavsec/power.hpp"

namespace uavsec {

double UserRate(int k, int i, int n, const AllocationState& alloc, const ChannelSet& ch,
                const ScenarioConfig& cfg);

// SINR at an arbitrary point of the eavesdropper disk; the jammer-side
// channel is recomputed for that exact point.
double LeakageSinr(int k, int i, int n, const AllocationState& alloc, const Vec2& eve_position,
                   const Vec2& info_pos, const Vec2& jammer_pos, const ScenarioConfig& cfg);

double TotalRate(const AllocationState& alloc, const ChannelSet& ch, const ScenarioConfig& cfg);

// Denominator of the energy efficiency. include_jammer=false drops P_total_J.
double TotalPower(const AllocationState& alloc, const Trajectory& info, const Trajectory& jammer,
                  const ScenarioConfig& cfg, bool include_jammer = true);

double EnergyEfficiency(const AllocationState& alloc, const Trajectory& info,
                        const Trajectory& jammer, const ChannelSet& ch, const ScenarioConfig& cfg,
                        bool include_jammer = true);

struct ConstraintCheck {
  std::string name;
  bool pass = true;
  double margin = 0.0;  // >= 0 means satisfied
  std::string worst;    // location of the worst violator
};

struct AuditResult {
  std::vector<ConstraintCheck> checks;
  double max_leakage_sinr = 0.0;
  double min_user_rate = 0.0;
  bool AllPass() const;
  bool AllPassExcept(const std::vector<std::string>& names) const;
  const ConstraintCheck* Find(const std::string& name) const;
};

struct AuditOptions {
  int samples_per_eve = 10000;
  uint64_t seed = 1;
  double tol_rel = 1e-6;
  double tol_leak = 1e-3;
  double tol_kin = 1e-9;
};

AuditResult Audit(const AllocationState& alloc, const Trajectory& info, const Trajectory& jammer,
                  const ScenarioConfig& cfg, const AuditOptions& opt = {});

}  // namespace uavsec
