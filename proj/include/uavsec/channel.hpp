#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <vector>

#include "uavsec/scenario.hpp"

namespace uavsec {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

double Distance3d(const Vec2& a, const Vec2& b, double H);

// beta0 / (||a - b||^2 + H^2). Used for both the info links and the jammer
// attenuations A_U, A_E.
double PathGain(const Vec2& a, const Vec2& b, double H, double beta0);

double InfoChannelGain(const Vec2& uav_pos, const Vec2& node_pos, const ScenarioConfig& cfg);

// Planar-array response toward node_pos. Entry (mx, my) sits at index mx*N_Jy + my.
CVec SteeringVector(const Vec2& uav_pos, const Vec2& node_pos, const ArrayParams& array,
                    double H);

// h h^H.
CMat JammerChannelMatrix(const CVec& steering);

// Largest info gain over the eavesdropper's uncertainty disk.
double WorstCaseInfoGain(const Vec2& uav_pos, const Eavesdropper& eve, const ScenarioConfig& cfg);

struct UncertaintySample {
  int eve = 0;
  Vec2 delta = Vec2::Zero();
  Vec2 position = Vec2::Zero();
};

// Centre plus concentric rings (outermost on the boundary), G points total.
std::vector<UncertaintySample> UncertaintySamples(const Eavesdropper& eve, int G,
                                                  int eve_index = 0);

// Extra leakage row at one disk point of eavesdropper e, slot n.
struct LeakageCut {
  int e = 0;
  int n = 0;
  Vec2 position = Vec2::Zero();
  CMat H;
  double A = 0.0;
};

// Quantities that depend only on the jammer path (fixed during optimization).
struct JammerChannels {
  int N = 0;
  int K = 0;
  int E = 0;
  int G = 0;
  // [k][n]
  std::vector<std::vector<CMat>> H_JU;
  std::vector<std::vector<double>> A_U;
  // [e][g][n]
  std::vector<std::vector<std::vector<CMat>>> H_JE;
  std::vector<std::vector<std::vector<double>>> A_E;
  std::vector<std::vector<UncertaintySample>> samples;  // [e][g]
  // Points added by the dense leakage search; enforced like the samples.
  std::vector<LeakageCut> cuts;
};

JammerChannels BuildJammerChannels(const ScenarioConfig& cfg, const Trajectory& jammer, int G);

// Gains that depend on the information UAV path.
struct InfoChannels {
  std::vector<std::vector<double>> h_IU;        // [k][n]
  std::vector<std::vector<double>> h_IE_worst;  // [e][n]
};

InfoChannels BuildInfoChannels(const ScenarioConfig& cfg, const Trajectory& info);

struct ChannelSet {
  JammerChannels jam;
  InfoChannels info;
};

ChannelSet BuildChannelSet(const ScenarioConfig& cfg, const Trajectory& info,
                           const Trajectory& jammer, int G);

// Deterministic low-discrepancy points covering the disk (sunflower layout).
std::vector<Vec2> DiskSamples(const Eavesdropper& eve, int count, uint64_t seed);

// Dense candidate points per eavesdropper with the jammer response at each,
// used to locate the weakest jamming inside a disk.
struct LeakagePool {
  std::vector<std::vector<Vec2>> points;  // [e][m]
  // [e][n]: N_J x M, column m = sqrt(A_E) * steering toward point m.
  std::vector<std::vector<CMat>> steer;
};

LeakagePool BuildLeakagePool(const ScenarioConfig& cfg, const Trajectory& jammer, int count,
                             uint64_t seed);

// min over the pool of A_E Tr(H_JE Z) for eavesdropper e at slot n; arg gets the
// point index.
double PoolJamMin(const LeakagePool& pool, int e, int n, const CMat& Z, int* arg = nullptr);

// A_E Tr(H_JE Z) for a node at pos.
double JamAt(const ScenarioConfig& cfg, const Vec2& jammer_pos, const Vec2& pos, const CMat& Z);

// Weakest jamming over the whole disk of eavesdropper e at slot n: pool minimum
// refined by a local pattern search. where gets the minimizer.
double DiskJamMin(const LeakagePool& pool, const ScenarioConfig& cfg, const Trajectory& jammer,
                  int e, int n, const CMat& Z, Vec2* where = nullptr);

// Re Tr(H Z) for Hermitian H, Z.
double TraceProduct(const CMat& H, const CMat& Z);

}  // namespace uavsec
