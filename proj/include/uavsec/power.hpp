#pragma once

#include <stdexcept>
#include <vector>

#include "uavsec/allocation.hpp"
#include "uavsec/scenario.hpp"

namespace uavsec {

// Below this speed the induced-power term is treated as out of domain.
inline constexpr double kVFloor = 0.1;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct PowerBreakdown {
  double blade_profile = 0.0;
  double induced = 0.0;
  double parasite = 0.0;
  double comm = 0.0;
  double circuit = 0.0;
  double total = 0.0;
};

PowerBreakdown FlightPowerBreakdown(double speed, const FlightPowerParams& fp);
double FlightPower(double speed, const FlightPowerParams& fp);
// d/dspeed of FlightPower.
double FlightPowerDerivative(double speed, const FlightPowerParams& fp);

// Golden-section minimizer of FlightPower over [lo, hi].
double MinPowerSpeed(const FlightPowerParams& fp, double lo = 1.0, double hi = 30.0);

PowerBreakdown InfoTotalPower(const AllocationState& alloc, int n, const ScenarioConfig& cfg,
                              double info_speed);
// Throws std::invalid_argument if a covariance is not PSD.
PowerBreakdown JammerTotalPower(const std::vector<CMat>& Z_slot, const ScenarioConfig& cfg,
                                double jammer_speed);

}  // namespace uavsec
