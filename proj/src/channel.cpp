#include "uavsec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace uavsec {

std::vector<Vec2> DiskSamples(const Eavesdropper& eve, int count, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * std::numbers::pi);
  const double rot = unif(rng);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  std::vector<Vec2> pts;
  pts.reserve(count);
  for (int j = 0; j < count; ++j) {
    // Last point sits exactly on the boundary.
    const double r = eve.radius * std::sqrt((j + 1.0) / count);
    const double th = rot + golden * j;
    pts.push_back(eve.est_position + r * Vec2(std::cos(th), std::sin(th)));
  }
  return pts;
}

double Distance3d(const Vec2& a, const Vec2& b, double H) {
  return std::sqrt((a - b).squaredNorm() + H * H);
}

double PathGain(const Vec2& a, const Vec2& b, double H, double beta0) {
  return beta0 / ((a - b).squaredNorm() + H * H);
}

double InfoChannelGain(const Vec2& uav_pos, const Vec2& node_pos, const ScenarioConfig& cfg) {
  return PathGain(uav_pos, node_pos, cfg.H, cfg.beta0);
}

CVec SteeringVector(const Vec2& uav_pos, const Vec2& node_pos, const ArrayParams& array,
                    double H) {
  const Vec2 d = node_pos - uav_pos;
  const double horiz = d.norm();
  const double sin_theta = H / std::sqrt(horiz * horiz + H * H);
  double sin_vs = 0.0;
  double cos_vs = 1.0;
  if (horiz >= 1e-9) {
    // Absolute values as in the model: direction signs are discarded.
    sin_vs = std::abs(d.x()) / horiz;
    cos_vs = std::abs(d.y()) / horiz;
  }
  const double k = 2.0 * std::numbers::pi * array.delta_J / array.lambda_c * sin_theta;
  CVec h(array.NJ());
  for (int mx = 0; mx < array.N_Jx; ++mx) {
    for (int my = 0; my < array.N_Jy; ++my) {
      const double phase = -k * (mx * cos_vs + my * sin_vs);
      h[mx * array.N_Jy + my] = std::polar(1.0, phase);
    }
  }
  return h;
}

CMat JammerChannelMatrix(const CVec& steering) { return steering * steering.adjoint(); }

double WorstCaseInfoGain(const Vec2& uav_pos, const Eavesdropper& eve,
                         const ScenarioConfig& cfg) {
  const double gap = std::max(0.0, (uav_pos - eve.est_position).norm() - eve.radius);
  return cfg.beta0 / (gap * gap + cfg.H * cfg.H);
}

std::vector<UncertaintySample> UncertaintySamples(const Eavesdropper& eve, int G,
                                                  int eve_index) {
  std::vector<UncertaintySample> out;
  auto push = [&](const Vec2& delta) {
    UncertaintySample s;
    s.eve = eve_index;
    s.delta = delta;
    s.position = eve.est_position + delta;
    out.push_back(s);
  };
  push(Vec2::Zero());
  const int m = std::max(0, G - 1);
  if (m == 0) return out;
  // Ring j of R has radius Q*j/R and a share of points proportional to j.
  const int rings = std::max(1, static_cast<int>(std::lround(std::sqrt(m / 8.0))));
  const int weight = rings * (rings + 1) / 2;
  int assigned = 0;
  for (int j = 1; j <= rings; ++j) {
    int cnt = (j == rings) ? m - assigned : (m * j) / weight;
    cnt = std::max(cnt, 0);
    assigned += cnt;
    const double rad = eve.radius * j / rings;
    for (int q = 0; q < cnt; ++q) {
      const double ang = 2.0 * std::numbers::pi * q / cnt;
      push(rad * Vec2(std::cos(ang), std::sin(ang)));
    }
  }
  return out;
}

JammerChannels BuildJammerChannels(const ScenarioConfig& cfg, const Trajectory& jammer, int G) {
  JammerChannels jc;
  jc.N = cfg.N;
  jc.K = cfg.K();
  jc.E = cfg.E();
  jc.G = G;
  jc.H_JU.assign(jc.K, std::vector<CMat>(jc.N));
  jc.A_U.assign(jc.K, std::vector<double>(jc.N));
  for (int k = 0; k < jc.K; ++k) {
    for (int n = 0; n < jc.N; ++n) {
      const Vec2& pj = jammer.positions[n];
      const Vec2& pu = cfg.users[k].position;
      jc.H_JU[k][n] = JammerChannelMatrix(SteeringVector(pj, pu, cfg.array, cfg.H));
      jc.A_U[k][n] = PathGain(pj, pu, cfg.H, cfg.beta0);
    }
  }
  jc.samples.resize(jc.E);
  jc.H_JE.resize(jc.E);
  jc.A_E.resize(jc.E);
  for (int e = 0; e < jc.E; ++e) {
    jc.samples[e] = UncertaintySamples(cfg.eavesdroppers[e], G, e);
    const int ng = static_cast<int>(jc.samples[e].size());
    jc.H_JE[e].assign(ng, std::vector<CMat>(jc.N));
    jc.A_E[e].assign(ng, std::vector<double>(jc.N));
    for (int g = 0; g < ng; ++g) {
      for (int n = 0; n < jc.N; ++n) {
        const Vec2& pj = jammer.positions[n];
        const Vec2& pe = jc.samples[e][g].position;
        jc.H_JE[e][g][n] = JammerChannelMatrix(SteeringVector(pj, pe, cfg.array, cfg.H));
        jc.A_E[e][g][n] = PathGain(pj, pe, cfg.H, cfg.beta0);
      }
    }
  }
  return jc;
}

InfoChannels BuildInfoChannels(const ScenarioConfig& cfg, const Trajectory& info) {
  InfoChannels ic;
  const int N = cfg.N;
  ic.h_IU.assign(cfg.K(), std::vector<double>(N));
  ic.h_IE_worst.assign(cfg.E(), std::vector<double>(N));
  for (int n = 0; n < N; ++n) {
    for (int k = 0; k < cfg.K(); ++k) {
      ic.h_IU[k][n] = InfoChannelGain(info.positions[n], cfg.users[k].position, cfg);
    }
    for (int e = 0; e < cfg.E(); ++e) {
      ic.h_IE_worst[e][n] = WorstCaseInfoGain(info.positions[n], cfg.eavesdroppers[e], cfg);
    }
  }
  return ic;
}

ChannelSet BuildChannelSet(const ScenarioConfig& cfg, const Trajectory& info,
                           const Trajectory& jammer, int G) {
  return ChannelSet{BuildJammerChannels(cfg, jammer, G), BuildInfoChannels(cfg, info)};
}

double TraceProduct(const CMat& H, const CMat& Z) {
  // Tr(HZ) = sum_{r,c} H_rc Z_cr
  return (H.cwiseProduct(Z.transpose())).sum().real();
}

LeakagePool BuildLeakagePool(const ScenarioConfig& cfg, const Trajectory& jammer, int count,
                             uint64_t seed) {
  LeakagePool pool;
  const int E = cfg.E(), N = static_cast<int>(jammer.positions.size()), nj = cfg.NJ();
  pool.points.resize(E);
  pool.steer.resize(E);
  for (int e = 0; e < E; ++e) {
    pool.points[e] = DiskSamples(cfg.eavesdroppers[e], count, seed + e);
    pool.steer[e].resize(N);
    for (int n = 0; n < N; ++n) {
      CMat S(nj, count);
      for (int m = 0; m < count; ++m) {
        const Vec2& pe = pool.points[e][m];
        S.col(m) = std::sqrt(PathGain(jammer.positions[n], pe, cfg.H, cfg.beta0)) *
                   SteeringVector(jammer.positions[n], pe, cfg.array, cfg.H);
      }
      pool.steer[e][n] = std::move(S);
    }
  }
  return pool;
}

double PoolJamMin(const LeakagePool& pool, int e, int n, const CMat& Z, int* arg) {
  const CMat& S = pool.steer[e][n];
  if (S.cols() == 0) return 0.0;
  const Eigen::VectorXd jam =
      (S.conjugate().cwiseProduct(Z * S)).colwise().sum().real().transpose();
  Eigen::Index m = 0;
  const double v = jam.minCoeff(&m);
  if (arg) *arg = static_cast<int>(m);
  return std::max(v, 0.0);
}

double JamAt(const ScenarioConfig& cfg, const Vec2& jammer_pos, const Vec2& pos, const CMat& Z) {
  const CVec s = SteeringVector(jammer_pos, pos, cfg.array, cfg.H);
  return PathGain(jammer_pos, pos, cfg.H, cfg.beta0) * (s.adjoint() * Z * s)(0, 0).real();
}

double DiskJamMin(const LeakagePool& pool, const ScenarioConfig& cfg, const Trajectory& jammer,
                  int e, int n, const CMat& Z, Vec2* where) {
  const CMat& S = pool.steer[e][n];
  const Eavesdropper& eve = cfg.eavesdroppers[e];
  const Vec2& pj = jammer.positions[n];
  if (S.cols() == 0 || Z.size() == 0) {
    if (where) *where = eve.est_position;
    return 0.0;
  }
  const Eigen::VectorXd jam =
      (S.conjugate().cwiseProduct(Z * S)).colwise().sum().real().transpose();
  const int M = static_cast<int>(jam.size());
  // A few lowest pool points seed a compass search kept inside the disk.
  std::vector<int> order(M);
  for (int m = 0; m < M; ++m) order[m] = m;
  const int seeds = std::min(M, 4);
  std::partial_sort(order.begin(), order.begin() + seeds, order.end(),
                    [&](int a, int b) { return jam[a] < jam[b] || (jam[a] == jam[b] && a < b); });
  auto project = [&](const Vec2& q) {
    const Vec2 d = q - eve.est_position;
    const double r = d.norm();
    return r > eve.radius ? Vec2(eve.est_position + d * (eve.radius / r)) : q;
  };
  const double spacing = eve.radius * std::sqrt(std::numbers::pi / std::max(M, 1));
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_pos = eve.est_position;
  for (int sidx = 0; sidx < seeds; ++sidx) {
    Vec2 x = pool.points[e][order[sidx]];
    double fx = JamAt(cfg, pj, x, Z);
    double step = spacing;
    while (step > 1e-4) {
      bool moved = false;
      for (const Vec2& d : {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1), Vec2(0.7071, 0.7071),
                            Vec2(-0.7071, 0.7071), Vec2(0.7071, -0.7071), Vec2(-0.7071, -0.7071)}) {
        const Vec2 y = project(x + step * d);
        const double fy = JamAt(cfg, pj, y, Z);
        if (fy < fx) {
          x = y;
          fx = fy;
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    if (fx < best) {
      best = fx;
      best_pos = x;
    }
  }
  if (where) *where = best_pos;
  return std::max(best, 0.0);
}

}  // namespace uavsec
