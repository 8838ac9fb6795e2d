#pragma once

#include <vector>

#include "uavsec/channel.hpp"

namespace uavsec {

// Scheduling, powers and noise covariances for every (user k, subcarrier i, slot n).
struct AllocationState {
  int K = 0;
  int NF = 0;
  int N = 0;
  int NJ = 0;
  std::vector<double> alpha;
  std::vector<double> p;
  std::vector<double> p_tilde;
  std::vector<CMat> Z;        // [i][n]
  std::vector<CMat> Z_tilde;  // [k][i][n]

  AllocationState() = default;
  AllocationState(int k, int nf, int n, int nj);

  int Idx(int k, int i, int n) const { return (n * K + k) * NF + i; }
  int ZIdx(int i, int n) const { return n * NF + i; }

  double& Alpha(int k, int i, int n) { return alpha[Idx(k, i, n)]; }
  double Alpha(int k, int i, int n) const { return alpha[Idx(k, i, n)]; }
  double& P(int k, int i, int n) { return p[Idx(k, i, n)]; }
  double P(int k, int i, int n) const { return p[Idx(k, i, n)]; }
  double& PT(int k, int i, int n) { return p_tilde[Idx(k, i, n)]; }
  double PT(int k, int i, int n) const { return p_tilde[Idx(k, i, n)]; }
  CMat& Zm(int i, int n) { return Z[ZIdx(i, n)]; }
  const CMat& Zm(int i, int n) const { return Z[ZIdx(i, n)]; }
  CMat& ZT(int k, int i, int n) { return Z_tilde[Idx(k, i, n)]; }
  const CMat& ZT(int k, int i, int n) const { return Z_tilde[Idx(k, i, n)]; }
};

}  // namespace uavsec
