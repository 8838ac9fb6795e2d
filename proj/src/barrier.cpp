#include "uavsec/barrier.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace uavsec::barrier {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using cplx = std::complex<double>;

VectorXd Gather(const VectorXd& x, const std::vector<int>& idx) {
  VectorXd z(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) z[j] = x[idx[j]];
  return z;
}

struct LmiCache {
  std::vector<int> vars;  // local ordering: scalars, then each Hermitian block
};

CMat LmiMatrix(const LmiIneq& L, const VectorXd& x) {
  CMat F = L.F0;
  for (size_t l = 0; l < L.scalar_idx.size(); ++l) F += x[L.scalar_idx[l]] * L.scalar_coef[l];
  for (size_t b = 0; b < L.herm_offset.size(); ++b) {
    F += L.herm_sign[b] * HermFromParams(x.data() + L.herm_offset[b], L.n);
  }
  return F;
}

// -log det F with gradient and Hessian in the LmiCache ordering.
bool LmiBarrier(const LmiIneq& L, const VectorXd& x, double* val,
                VectorXd* grad, MatrixXd* hess) {
  const CMat F = LmiMatrix(L, x);
  Eigen::LLT<CMat> llt(F);
  if (llt.info() != Eigen::Success) return false;
  double logdet = 0.0;
  const CMat& Lm = llt.matrixLLT();
  for (int r = 0; r < L.n; ++r) {
    const double d = Lm(r, r).real();
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    logdet += 2.0 * std::log(d);
  }
  *val = -logdet;
  if (!grad) return true;
  CMat M = llt.solve(CMat::Identity(L.n, L.n));
  M = 0.5 * (M + M.adjoint()).eval();
  const int ns = static_cast<int>(L.scalar_idx.size());
  const int hd = L.n * L.n;
  const int nb = static_cast<int>(L.herm_offset.size());
  const int dim = ns + nb * hd;
  grad->resize(dim);
  hess->resize(dim, dim);
  // d/dx_a of -log det is -Re tr(M E_a); the Hessian entry is Re tr(M E_a M E_b),
  // so each Hessian row is the trace-coefficient vector of M E_a M.
  const VectorXd gb = -TraceCoeffs(M);
  std::vector<CMat> P(ns);
  for (int l = 0; l < ns; ++l) {
    (*grad)[l] = -(M.cwiseProduct(L.scalar_coef[l].transpose())).sum().real();
    P[l] = M * L.scalar_coef[l] * M;
  }
  for (int b = 0; b < nb; ++b) grad->segment(ns + b * hd, hd) = L.herm_sign[b] * gb;
  for (int l = 0; l < ns; ++l) {
    for (int m = l; m < ns; ++m) {
      const double v = (P[l].cwiseProduct(L.scalar_coef[m].transpose())).sum().real();
      (*hess)(l, m) = v;
      (*hess)(m, l) = v;
    }
    if (nb == 0) continue;
    const VectorXd row = TraceCoeffs(P[l]);
    for (int b = 0; b < nb; ++b) {
      hess->row(l).segment(ns + b * hd, hd) = L.herm_sign[b] * row.transpose();
      hess->col(l).segment(ns + b * hd, hd) = L.herm_sign[b] * row;
    }
  }
  if (nb == 0) return true;
  const int n = L.n;
  MatrixXd K(hd, hd);
  CMat A(n, n);
  for (int r = 0; r < n; ++r) {
    A.noalias() = M.col(r) * M.row(r);
    K.row(r) = TraceCoeffs(A).transpose();
  }
  int a = n;
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < n; ++c) {
      // E = e_r e_c^T + e_c e_r^T gives M E M = A + A^H; the imaginary
      // direction gives i (A - A^H).
      A.noalias() = M.col(r) * M.row(c);
      K.row(a) = 2.0 * TraceCoeffs(A).transpose();
      K.row(a + 1) = 2.0 * TraceCoeffs(cplx(0.0, 1.0) * A).transpose();
      a += 2;
    }
  }
  for (int b = 0; b < nb; ++b) {
    for (int c = 0; c < nb; ++c) {
      hess->block(ns + b * hd, ns + c * hd, hd, hd) = L.herm_sign[b] * L.herm_sign[c] * K;
    }
  }
  return true;
}

bool SocBarrier(const SocIneq& c, const VectorXd& x, double* val, VectorXd* grad,
                MatrixXd* hess) {
  const VectorXd z = Gather(x, c.idx);
  const double tau = c.c.dot(z) + c.d;
  const VectorXd w = c.A * z + c.a;
  const double gam = tau * tau - w.squaredNorm();
  if (!(tau > 0.0) || !(gam > 0.0)) return false;
  *val = -std::log(gam);
  if (!grad) return true;
  const VectorXd dg = 2.0 * tau * c.c - 2.0 * c.A.transpose() * w;
  const MatrixXd d2g = 2.0 * c.c * c.c.transpose() - 2.0 * c.A.transpose() * c.A;
  *grad = -dg / gam;
  *hess = -d2g / gam + dg * dg.transpose() / (gam * gam);
  return true;
}

double LinearSlack(const LinearIneq& c, const VectorXd& x) {
  double s = c.rhs;
  for (size_t j = 0; j < c.idx.size(); ++j) s -= c.coef[j] * x[c.idx[j]];
  return s;
}

// Spanning item contributions kept per Newton step.
struct TermEval {
  double val = 0.0;
  VectorXd grad;
  MatrixXd hess;
};

// Block-local linear rows sharing one variable list: A z <= rhs.
struct LinGroup {
  std::vector<int> idx;
  MatrixXd A;
  VectorXd rhs;
};

struct Layout {
  int nv = 0;
  int nb = 0;
  std::vector<int> starts;
  std::vector<int> block_of;
  // Block-local item lists.
  std::vector<std::vector<int>> obj, smooth, soc, lmi;
  std::vector<std::vector<LinGroup>> lin;
  std::vector<int> span_lin, span_smooth;
  // (constraint, term) pairs of spanning smooth constraints, per block.
  std::vector<std::vector<std::pair<int, int>>> span_terms;
  std::vector<LmiCache> lmi_cache;
  double degree = 0.0;
};

int CommonBlock(const Layout& lay, const std::vector<int>& idx) {
  if (idx.empty()) return 0;
  const int b = lay.block_of[idx[0]];
  for (int v : idx) {
    if (lay.block_of[v] != b) return -1;
  }
  return b;
}

Layout MakeLayout(const Problem& p) {
  Layout lay;
  lay.nv = p.num_vars();
  lay.starts = p.block_starts();
  if (lay.starts.empty()) lay.starts = {0, lay.nv};
  if (lay.starts.front() != 0 || lay.starts.back() != lay.nv) {
    throw std::invalid_argument("block starts must cover all variables");
  }
  lay.nb = static_cast<int>(lay.starts.size()) - 1;
  lay.block_of.assign(lay.nv, 0);
  for (int b = 0; b < lay.nb; ++b) {
    for (int v = lay.starts[b]; v < lay.starts[b + 1]; ++v) lay.block_of[v] = b;
  }
  lay.obj.resize(lay.nb);
  lay.lin.resize(lay.nb);
  lay.smooth.resize(lay.nb);
  lay.soc.resize(lay.nb);
  lay.lmi.resize(lay.nb);
  lay.span_terms.resize(lay.nb);
  for (size_t j = 0; j < p.objective_terms().size(); ++j) {
    const int b = CommonBlock(lay, p.objective_terms()[j]->idx());
    if (b < 0) throw std::invalid_argument("objective term spans blocks");
    lay.obj[b].push_back(static_cast<int>(j));
  }
  {
    std::vector<std::map<std::vector<int>, std::vector<int>>> rows(lay.nb);
    for (size_t j = 0; j < p.linear().size(); ++j) {
      const int b = CommonBlock(lay, p.linear()[j].idx);
      if (b < 0) {
        lay.span_lin.push_back(static_cast<int>(j));
      } else {
        rows[b][p.linear()[j].idx].push_back(static_cast<int>(j));
      }
      lay.degree += 1.0;
    }
    for (int b = 0; b < lay.nb; ++b) {
      for (const auto& [idx, js] : rows[b]) {
        LinGroup g;
        g.idx = idx;
        g.A.resize(static_cast<int>(js.size()), static_cast<int>(idx.size()));
        g.rhs.resize(static_cast<int>(js.size()));
        for (size_t r = 0; r < js.size(); ++r) {
          const LinearIneq& c = p.linear()[js[r]];
          for (size_t a = 0; a < idx.size(); ++a) g.A(r, a) = c.coef[a];
          g.rhs[r] = c.rhs;
        }
        lay.lin[b].push_back(std::move(g));
      }
    }
  }
  for (size_t j = 0; j < p.smooth().size(); ++j) {
    std::vector<int> all;
    for (const auto& t : p.smooth()[j].terms) all.insert(all.end(), t->idx().begin(), t->idx().end());
    const int b = CommonBlock(lay, all);
    if (b < 0) {
      lay.span_smooth.push_back(static_cast<int>(j));
      for (size_t q = 0; q < p.smooth()[j].terms.size(); ++q) {
        const int tb = CommonBlock(lay, p.smooth()[j].terms[q]->idx());
        if (tb < 0) throw std::invalid_argument("smooth term spans blocks");
        lay.span_terms[tb].push_back({static_cast<int>(j), static_cast<int>(q)});
      }
    } else {
      lay.smooth[b].push_back(static_cast<int>(j));
    }
    lay.degree += 1.0;
  }
  for (size_t j = 0; j < p.soc().size(); ++j) {
    const int b = CommonBlock(lay, p.soc()[j].idx);
    if (b < 0) throw std::invalid_argument("cone constraint spans blocks");
    lay.soc[b].push_back(static_cast<int>(j));
    lay.degree += 2.0;
  }
  lay.lmi_cache.resize(p.lmi().size());
  for (size_t j = 0; j < p.lmi().size(); ++j) {
    const LmiIneq& L = p.lmi()[j];
    LmiCache& c = lay.lmi_cache[j];
    c.vars = L.scalar_idx;
    for (int off : L.herm_offset) {
      for (int a = 0; a < L.n * L.n; ++a) c.vars.push_back(off + a);
    }
    const int b = CommonBlock(lay, c.vars);
    if (b < 0) throw std::invalid_argument("matrix inequality spans blocks");
    lay.lmi[b].push_back(static_cast<int>(j));
    lay.degree += L.n;
  }
  return lay;
}

void Scatter(const std::vector<int>& idx, int start, const VectorXd& g, const MatrixXd& h,
             double scale, VectorXd* gb, MatrixXd* hb) {
  const int m = static_cast<int>(idx.size());
  for (int a = 0; a < m; ++a) {
    (*gb)[idx[a] - start] += scale * g[a];
    for (int c = 0; c < m; ++c) (*hb)(idx[a] - start, idx[c] - start) += scale * h(a, c);
  }
}

// Barrier function value at x (kInf outside the domain).
double BarrierValue(const Problem& p, const Layout& lay, const VectorXd& x, double t,
                    bool parallel) {
  std::vector<double> part(lay.nb, 0.0);
  auto kernel = [&](int b) {
    double acc = 0.0;
    for (int v = lay.starts[b]; v < lay.starts[b + 1]; ++v) acc -= t * p.linear_objective()[v] * x[v];
    double val;
    for (int j : lay.obj[b]) {
      if (!p.objective_terms()[j]->Eval(x, &val, nullptr, nullptr)) return kInf;
      acc -= t * val;
    }
    for (const LinGroup& g : lay.lin[b]) {
      const VectorXd s = g.rhs - g.A * Gather(x, g.idx);
      if (!(s.minCoeff() > 0.0)) return kInf;
      acc -= s.array().log().sum();
    }
    for (int j : lay.smooth[b]) {
      double s = 0.0;
      for (const auto& term : p.smooth()[j].terms) {
        if (!term->Eval(x, &val, nullptr, nullptr)) return kInf;
        s += val;
      }
      if (!(s > 0.0)) return kInf;
      acc -= std::log(s);
    }
    for (int j : lay.soc[b]) {
      if (!SocBarrier(p.soc()[j], x, &val, nullptr, nullptr)) return kInf;
      acc += val;
    }
    for (int j : lay.lmi[b]) {
      if (!LmiBarrier(p.lmi()[j], x, &val, nullptr, nullptr)) return kInf;
      acc += val;
    }
    return acc;
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < lay.nb; ++b) part[b] = kernel(b);
  } else {
    for (int b = 0; b < lay.nb; ++b) part[b] = kernel(b);
  }
  double total = 0.0;
  for (double v : part) total += v;
  if (!std::isfinite(total)) return kInf;
  for (int j : lay.span_lin) {
    const double s = LinearSlack(p.linear()[j], x);
    if (!(s > 0.0)) return kInf;
    total -= std::log(s);
  }
  for (int j : lay.span_smooth) {
    double s = 0.0, val;
    for (const auto& term : p.smooth()[j].terms) {
      if (!term->Eval(x, &val, nullptr, nullptr)) return kInf;
      s += val;
    }
    if (!(s > 0.0)) return kInf;
    total -= std::log(s);
  }
  return total;
}

// Sparse low-rank column.
struct Column {
  std::vector<int> idx;
  std::vector<double> val;
};

// Newton system H = blockdiag(B) + U U^T, plus equality Schur complement.
class NewtonSystem {
 public:
  NewtonSystem(const Problem& p, const Layout& lay, bool parallel)
      : p_(p), lay_(lay), parallel_(parallel) {}

  // Returns false if some evaluation fails (x outside the domain).
  bool Assemble(const VectorXd& x, double t);
  VectorXd Direction() const;
  const VectorXd& gradient() const { return g_; }

 private:
  bool AssembleBlock(int b, const VectorXd& x, double t);
  bool FactorBlock(int b);
  void SolveBlock(int b, Eigen::Ref<VectorXd> v) const;
  VectorXd SolveB(const VectorXd& v) const;
  VectorXd SolveH(const VectorXd& v) const;

  const Problem& p_;
  const Layout& lay_;
  bool parallel_;
  VectorXd g_;
  std::vector<MatrixXd> blocks_;
  std::vector<Eigen::LLT<MatrixXd>> llt_;
  std::vector<VectorXd> scale_;
  std::vector<Column> cols_;
  // Spanning smooth constraints: slack and per-term evaluations.
  std::vector<double> span_slack_;
  std::vector<std::vector<TermEval>> span_eval_;
  MatrixXd W_;  // B^{-1} U
  Eigen::LLT<MatrixXd> cap_;
};

bool NewtonSystem::AssembleBlock(int b, const VectorXd& x, double t) {
  const int s0 = lay_.starts[b];
  const int nbv = lay_.starts[b + 1] - s0;
  MatrixXd& H = blocks_[b];
  H.setZero(nbv, nbv);
  VectorXd gb = VectorXd::Zero(nbv);
  for (int v = 0; v < nbv; ++v) gb[v] = -t * p_.linear_objective()[s0 + v];
  double val;
  VectorXd g;
  MatrixXd h;
  for (int j : lay_.obj[b]) {
    const auto& term = *p_.objective_terms()[j];
    if (!term.Eval(x, &val, &g, &h)) return false;
    Scatter(term.idx(), s0, g, h, -t, &gb, &H);
  }
  for (const LinGroup& lg : lay_.lin[b]) {
    const VectorXd s = lg.rhs - lg.A * Gather(x, lg.idx);
    if (!(s.minCoeff() > 0.0)) return false;
    const VectorXd w = s.cwiseInverse();
    const MatrixXd Aw = w.asDiagonal() * lg.A;
    g = lg.A.transpose() * w;
    h.noalias() = Aw.transpose() * Aw;
    Scatter(lg.idx, s0, g, h, 1.0, &gb, &H);
  }
  for (int j : lay_.smooth[b]) {
    const SmoothIneq& c = p_.smooth()[j];
    double s = 0.0;
    std::vector<TermEval> ev(c.terms.size());
    for (size_t q = 0; q < c.terms.size(); ++q) {
      if (!c.terms[q]->Eval(x, &ev[q].val, &ev[q].grad, &ev[q].hess)) return false;
      s += ev[q].val;
    }
    if (!(s > 0.0)) return false;
    // grad f (dense within the block)
    VectorXd df = VectorXd::Zero(nbv);
    for (size_t q = 0; q < c.terms.size(); ++q) {
      const auto& idx = c.terms[q]->idx();
      for (size_t a = 0; a < idx.size(); ++a) df[idx[a] - s0] += ev[q].grad[a];
      Scatter(idx, s0, VectorXd::Zero(idx.size()), ev[q].hess, -1.0 / s, &gb, &H);
    }
    gb -= df / s;
    H += df * df.transpose() / (s * s);
  }
  for (int j : lay_.soc[b]) {
    if (!SocBarrier(p_.soc()[j], x, &val, &g, &h)) return false;
    Scatter(p_.soc()[j].idx, s0, g, h, 1.0, &gb, &H);
  }
  for (int j : lay_.lmi[b]) {
    if (!LmiBarrier(p_.lmi()[j], x, &val, &g, &h)) return false;
    Scatter(lay_.lmi_cache[j].vars, s0, g, h, 1.0, &gb, &H);
  }
  for (const auto& [cj, q] : lay_.span_terms[b]) {
    const TermEval& ev = span_eval_[cj][q];
    const auto& idx = p_.smooth()[cj].terms[q]->idx();
    Scatter(idx, s0, VectorXd::Zero(idx.size()), ev.hess, -1.0 / span_slack_[cj], &gb, &H);
  }
  g_.segment(s0, nbv) = gb;
  return true;
}

bool NewtonSystem::FactorBlock(int b) {
  MatrixXd& H = blocks_[b];
  const int n = static_cast<int>(H.rows());
  VectorXd& d = scale_[b];
  d.resize(n);
  for (int a = 0; a < n; ++a) d[a] = H(a, a) > 0.0 ? 1.0 / std::sqrt(H(a, a)) : 1.0;
  MatrixXd S = d.asDiagonal() * H * d.asDiagonal();
  double reg = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    MatrixXd T = S;
    if (reg > 0.0) T.diagonal().array() += reg;
    llt_[b].compute(T);
    if (llt_[b].info() == Eigen::Success) return true;
    reg = reg == 0.0 ? 1e-14 : reg * 100.0;
  }
  return false;
}

void NewtonSystem::SolveBlock(int b, Eigen::Ref<VectorXd> v) const {
  const VectorXd& d = scale_[b];
  VectorXd y = d.asDiagonal() * v;
  llt_[b].solveInPlace(y);
  v = d.asDiagonal() * y;
}

VectorXd NewtonSystem::SolveB(const VectorXd& v) const {
  VectorXd out = v;
  for (int b = 0; b < lay_.nb; ++b) {
    SolveBlock(b, out.segment(lay_.starts[b], lay_.starts[b + 1] - lay_.starts[b]));
  }
  return out;
}

VectorXd NewtonSystem::SolveH(const VectorXd& v) const {
  VectorXd y = SolveB(v);
  const int r = static_cast<int>(cols_.size());
  if (r == 0) return y;
  VectorXd uy(r);
  for (int c = 0; c < r; ++c) {
    double s = 0.0;
    for (size_t a = 0; a < cols_[c].idx.size(); ++a) s += cols_[c].val[a] * y[cols_[c].idx[a]];
    uy[c] = s;
  }
  return y - W_ * cap_.solve(uy);
}

bool NewtonSystem::Assemble(const VectorXd& x, double t) {
  const int nv = lay_.nv;
  g_ = VectorXd::Zero(nv);
  blocks_.assign(lay_.nb, MatrixXd());
  llt_.assign(lay_.nb, Eigen::LLT<MatrixXd>());
  scale_.assign(lay_.nb, VectorXd());
  cols_.clear();
  // Spanning smooth constraints first; their curvature is block-local.
  span_slack_.assign(p_.smooth().size(), 0.0);
  span_eval_.assign(p_.smooth().size(), {});
  for (int j : lay_.span_smooth) {
    const SmoothIneq& c = p_.smooth()[j];
    auto& ev = span_eval_[j];
    ev.resize(c.terms.size());
    double s = 0.0;
    for (size_t q = 0; q < c.terms.size(); ++q) {
      if (!c.terms[q]->Eval(x, &ev[q].val, &ev[q].grad, &ev[q].hess)) return false;
      s += ev[q].val;
    }
    if (!(s > 0.0)) return false;
    span_slack_[j] = s;
  }
  std::vector<char> ok(lay_.nb, 1);
  if (parallel_) {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < lay_.nb; ++b) ok[b] = AssembleBlock(b, x, t);
  } else {
    for (int b = 0; b < lay_.nb; ++b) ok[b] = AssembleBlock(b, x, t);
  }
  for (char o : ok) {
    if (!o) return false;
  }
  for (int j : lay_.span_lin) {
    const LinearIneq& c = p_.linear()[j];
    const double s = LinearSlack(c, x);
    if (!(s > 0.0)) return false;
    Column col;
    for (size_t a = 0; a < c.idx.size(); ++a) {
      g_[c.idx[a]] += c.coef[a] / s;
      col.idx.push_back(c.idx[a]);
      col.val.push_back(c.coef[a] / s);
    }
    cols_.push_back(std::move(col));
  }
  for (int j : lay_.span_smooth) {
    const SmoothIneq& c = p_.smooth()[j];
    const double s = span_slack_[j];
    VectorXd df = VectorXd::Zero(nv);
    std::vector<char> touched(nv, 0);
    for (size_t q = 0; q < c.terms.size(); ++q) {
      const auto& idx = c.terms[q]->idx();
      for (size_t a = 0; a < idx.size(); ++a) {
        df[idx[a]] += span_eval_[j][q].grad[a];
        touched[idx[a]] = 1;
      }
    }
    Column col;
    for (int v = 0; v < nv; ++v) {
      if (!touched[v]) continue;
      g_[v] -= df[v] / s;
      col.idx.push_back(v);
      col.val.push_back(df[v] / s);
    }
    cols_.push_back(std::move(col));
  }
  if (parallel_) {
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < lay_.nb; ++b) ok[b] = FactorBlock(b);
  } else {
    for (int b = 0; b < lay_.nb; ++b) ok[b] = FactorBlock(b);
  }
  for (char o : ok) {
    if (!o) throw std::runtime_error("Newton block is not positive definite");
  }
  const int r = static_cast<int>(cols_.size());
  if (r > 0) {
    W_ = MatrixXd::Zero(nv, r);
    auto col_kernel = [&](int c) {
      VectorXd u = VectorXd::Zero(nv);
      std::vector<char> blk(lay_.nb, 0);
      for (size_t a = 0; a < cols_[c].idx.size(); ++a) {
        u[cols_[c].idx[a]] = cols_[c].val[a];
        blk[lay_.block_of[cols_[c].idx[a]]] = 1;
      }
      for (int b = 0; b < lay_.nb; ++b) {
        if (!blk[b]) continue;
        const int s0 = lay_.starts[b], len = lay_.starts[b + 1] - s0;
        SolveBlock(b, u.segment(s0, len));
        W_.col(c).segment(s0, len) = u.segment(s0, len);
      }
    };
    if (parallel_) {
#pragma omp parallel for schedule(dynamic)
      for (int c = 0; c < r; ++c) col_kernel(c);
    } else {
      for (int c = 0; c < r; ++c) col_kernel(c);
    }
    MatrixXd C = MatrixXd::Identity(r, r);
    for (int c = 0; c < r; ++c) {
      for (size_t a = 0; a < cols_[c].idx.size(); ++a) {
        C.row(c) += cols_[c].val[a] * W_.row(cols_[c].idx[a]);
      }
    }
    C = 0.5 * (C + C.transpose()).eval();
    cap_.compute(C);
    if (cap_.info() != Eigen::Success) throw std::runtime_error("capacitance matrix is singular");
  }
  return true;
}

VectorXd NewtonSystem::Direction() const {
  VectorXd dx = SolveH(-g_);
  const auto& eqs = p_.equalities();
  if (eqs.empty()) return dx;
  const int m = static_cast<int>(eqs.size());
  MatrixXd HinvAt(lay_.nv, m);
  for (int e = 0; e < m; ++e) {
    VectorXd a = VectorXd::Zero(lay_.nv);
    for (size_t j = 0; j < eqs[e].idx.size(); ++j) a[eqs[e].idx[j]] += eqs[e].coef[j];
    HinvAt.col(e) = SolveH(a);
  }
  MatrixXd S(m, m);
  VectorXd rhs(m);
  for (int e = 0; e < m; ++e) {
    double r = 0.0;
    for (size_t j = 0; j < eqs[e].idx.size(); ++j) r += eqs[e].coef[j] * dx[eqs[e].idx[j]];
    rhs[e] = r;
    for (int f = 0; f < m; ++f) {
      double s = 0.0;
      for (size_t j = 0; j < eqs[e].idx.size(); ++j) s += eqs[e].coef[j] * HinvAt(eqs[e].idx[j], f);
      S(e, f) = s;
    }
  }
  S = 0.5 * (S + S.transpose()).eval();
  // A dx_free + A H^-1 A^T nu = 0
  const VectorXd nu = S.ldlt().solve(rhs);
  return dx - HinvAt * nu;
}

double MaxLinearStep(const Problem& p, const Layout& lay, const VectorXd& x,
                     const VectorXd& dx) {
  double smax = 1.0;
  for (int b = 0; b < lay.nb; ++b) {
    for (const LinGroup& g : lay.lin[b]) {
      const VectorXd adx = g.A * Gather(dx, g.idx);
      if (!(adx.maxCoeff() > 0.0)) continue;
      const VectorXd s = g.rhs - g.A * Gather(x, g.idx);
      for (int r = 0; r < adx.size(); ++r) {
        if (adx[r] > 0.0) smax = std::min(smax, 0.99 * s[r] / adx[r]);
      }
    }
  }
  for (int j : lay.span_lin) {
    const LinearIneq& c = p.linear()[j];
    double adx = 0.0;
    for (size_t k = 0; k < c.idx.size(); ++k) adx += c.coef[k] * dx[c.idx[k]];
    if (adx > 0.0) smax = std::min(smax, 0.99 * LinearSlack(c, x) / adx);
  }
  return smax;
}

}  // namespace

bool SmoothTerm::Eval(const VectorXd& x, double* val, VectorXd* grad, MatrixXd* hess) const {
  return EvalLocal(Gather(x, idx_), val, grad, hess);
}

AffineTerm::AffineTerm(std::vector<int> idx, VectorXd b, double c)
    : SmoothTerm(std::move(idx)), b_(std::move(b)), c_(c) {}

bool AffineTerm::EvalLocal(const VectorXd& z, double* val, VectorXd* grad, MatrixXd* hess) const {
  *val = c_ + b_.dot(z);
  if (grad) {
    *grad = b_;
    hess->setZero(z.size(), z.size());
  }
  return true;
}

ConcaveQuadTerm::ConcaveQuadTerm(std::vector<int> idx, MatrixXd Q, VectorXd b, double c)
    : SmoothTerm(std::move(idx)), Q_(std::move(Q)), b_(std::move(b)), c_(c) {}

bool ConcaveQuadTerm::EvalLocal(const VectorXd& z, double* val, VectorXd* grad,
                                MatrixXd* hess) const {
  const VectorXd Qz = Q_ * z;
  *val = c_ + b_.dot(z) - z.dot(Qz);
  if (grad) {
    *grad = b_ - 2.0 * Qz;
    *hess = -2.0 * Q_;
  }
  return true;
}

namespace {
std::vector<int> Prepend(int s, std::vector<int> rest) {
  rest.insert(rest.begin(), s);
  return rest;
}
}  // namespace

PerspectiveLogTerm::PerspectiveLogTerm(int s_var, std::vector<int> y_idx, VectorXd g, double y0,
                                       double coef)
    : SmoothTerm(Prepend(s_var, std::move(y_idx))),
      has_s_(true),
      s_const_(0.0),
      g_(std::move(g)),
      y0_(y0),
      coef_(coef) {}

PerspectiveLogTerm::PerspectiveLogTerm(double s_const, std::vector<int> y_idx, VectorXd g,
                                       double y0, double coef)
    : SmoothTerm(std::move(y_idx)),
      has_s_(false),
      s_const_(s_const),
      g_(std::move(g)),
      y0_(y0),
      coef_(coef) {}

bool PerspectiveLogTerm::EvalLocal(const VectorXd& z, double* val, VectorXd* grad,
                                   MatrixXd* hess) const {
  const int off = has_s_ ? 1 : 0;
  const double s = has_s_ ? z[0] : s_const_;
  const double y = y0_ + g_.dot(z.tail(z.size() - off));
  if (!(s > 0.0) || !(s + y > 0.0)) return false;
  const double r = y / s;
  *val = coef_ * s * std::log1p(r);
  if (!grad) return true;
  const int m = static_cast<int>(z.size());
  grad->resize(m);
  hess->resize(m, m);
  const double sy = s + y;
  if (has_s_) {
    (*grad)[0] = coef_ * (std::log1p(r) - r / (1.0 + r));
    grad->tail(m - 1) = coef_ * s / sy * g_;
    VectorXd w(m);
    w[0] = y;
    w.tail(m - 1) = -s * g_;
    *hess = (-coef_ / (s * sy * sy)) * w * w.transpose();
  } else {
    *grad = coef_ * s / sy * g_;
    *hess = (-coef_ * s / (sy * sy)) * g_ * g_.transpose();
  }
  return true;
}

NegReciprocalTerm::NegReciprocalTerm(int var, double coef) : SmoothTerm({var}), coef_(coef) {}

bool NegReciprocalTerm::EvalLocal(const VectorXd& z, double* val, VectorXd* grad,
                                  MatrixXd* hess) const {
  const double v = z[0];
  if (!(v > 0.0)) return false;
  *val = -coef_ / v;
  if (grad) {
    *grad = VectorXd::Constant(1, coef_ / (v * v));
    *hess = MatrixXd::Constant(1, 1, -2.0 * coef_ / (v * v * v));
  }
  return true;
}

NegCubeTerm::NegCubeTerm(int var, double coef) : SmoothTerm({var}), coef_(coef) {}

bool NegCubeTerm::EvalLocal(const VectorXd& z, double* val, VectorXd* grad,
                            MatrixXd* hess) const {
  const double v = z[0];
  if (!(v >= 0.0)) return false;
  *val = -coef_ * v * v * v;
  if (grad) {
    *grad = VectorXd::Constant(1, -3.0 * coef_ * v * v);
    *hess = MatrixXd::Constant(1, 1, -6.0 * coef_ * v);
  }
  return true;
}

int HermDim(int n) { return n * n; }

CMat HermFromParams(const double* x, int n) {
  CMat Z(n, n);
  for (int r = 0; r < n; ++r) Z(r, r) = x[r];
  int k = n;
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < n; ++c) {
      Z(r, c) = cplx(x[k], x[k + 1]);
      Z(c, r) = cplx(x[k], -x[k + 1]);
      k += 2;
    }
  }
  return Z;
}

void HermToParams(const CMat& Z, double* x) {
  const int n = static_cast<int>(Z.rows());
  for (int r = 0; r < n; ++r) x[r] = Z(r, r).real();
  int k = n;
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < n; ++c) {
      const cplx v = 0.5 * (Z(r, c) + std::conj(Z(c, r)));
      x[k] = v.real();
      x[k + 1] = v.imag();
      k += 2;
    }
  }
}

VectorXd TraceCoeffs(const CMat& H) {
  const int n = static_cast<int>(H.rows());
  VectorXd v(n * n);
  for (int r = 0; r < n; ++r) v[r] = H(r, r).real();
  int k = n;
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < n; ++c) {
      const cplx h = 0.5 * (H(r, c) + std::conj(H(c, r)));
      v[k] = 2.0 * h.real();
      v[k + 1] = 2.0 * h.imag();
      k += 2;
    }
  }
  return v;
}

int Problem::AddVariables(int count) {
  const int first = num_vars_;
  num_vars_ += count;
  c_.conservativeResize(num_vars_);
  c_.tail(count).setZero();
  return first;
}

int Problem::AddGroup(const std::string& name) {
  groups_.push_back(name);
  return static_cast<int>(groups_.size()) - 1;
}

void Problem::AddLinearObjective(int var, double coef) { c_[var] += coef; }

void Problem::AddLowerBound(int var, double lo, int group) {
  AddLinearIneq({{var}, {-1.0}, -lo, group});
}

void Problem::AddUpperBound(int var, double hi, int group) {
  AddLinearIneq({{var}, {1.0}, hi, group});
}

double Problem::Objective(const VectorXd& x) const {
  double v = obj_const_ + c_.dot(x);
  double tv;
  for (const auto& t : obj_terms_) {
    if (!t->Eval(x, &tv, nullptr, nullptr)) return -kInf;
    v += tv;
  }
  return v;
}

std::string Problem::FirstViolatedGroup(const VectorXd& x) const {
  auto name = [&](int g) { return g >= 0 && g < static_cast<int>(groups_.size()) ? groups_[g] : std::string("constraint"); };
  for (const auto& c : lin_) {
    if (!(LinearSlack(c, x) > 0.0)) return name(c.group);
  }
  for (const auto& c : smooth_) {
    double s = 0.0, v;
    bool ok = true;
    for (const auto& t : c.terms) {
      if (!t->Eval(x, &v, nullptr, nullptr)) {
        ok = false;
        break;
      }
      s += v;
    }
    if (!ok || !(s > 0.0)) return name(c.group);
  }
  double v;
  for (const auto& c : soc_) {
    if (!SocBarrier(c, x, &v, nullptr, nullptr)) return name(c.group);
  }
  for (const auto& c : lmi_) {
    Eigen::LLT<CMat> llt(LmiMatrix(c, x));
    bool ok = llt.info() == Eigen::Success;
    for (int r = 0; ok && r < c.n; ++r) ok = llt.matrixLLT()(r, r).real() > 0.0;
    if (!ok) return name(c.group);
  }
  return "";
}

double Problem::BarrierDegree() const {
  double m = static_cast<double>(lin_.size() + smooth_.size()) + 2.0 * soc_.size();
  for (const auto& c : lmi_) m += c.n;
  return m;
}

std::string ToString(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kMaxIterations: return "max_iterations";
    case Status::kNumerical: return "numerical";
    case Status::kInfeasibleStart: return "infeasible_start";
    case Status::kStopped: return "stopped";
  }
  return "unknown";
}

VectorXd NewtonDirection(const Problem& prob, const VectorXd& x, double t, bool parallel) {
  const Layout lay = MakeLayout(prob);
  NewtonSystem sys(prob, lay, parallel);
  if (!sys.Assemble(x, t)) throw std::invalid_argument("point outside the barrier domain");
  return sys.Direction();
}

Result Solve(const Problem& prob, const VectorXd& x0, const Options& opt) {
  Result res;
  res.x = x0;
  const std::string bad = prob.FirstViolatedGroup(x0);
  if (!bad.empty()) {
    res.status = Status::kInfeasibleStart;
    res.message = bad;
    return res;
  }
  const Layout lay = MakeLayout(prob);
  NewtonSystem sys(prob, lay, opt.parallel);
  const double m = lay.degree;
  VectorXd x = x0;
  double t = opt.t0;
  res.status = Status::kOptimal;
  int steps = 0;
  while (true) {
    // Centering.
    double fx = BarrierValue(prob, lay, x, t, opt.parallel);
    int quad_steps = 0, stalled = 0, local = 0;
    while (true) {
      if (steps >= opt.max_newton) {
        res.status = Status::kMaxIterations;
        break;
      }
      if (!sys.Assemble(x, t)) {
        res.status = Status::kNumerical;
        res.message = "lost strict feasibility";
        break;
      }
      const VectorXd dx = sys.Direction();
      const double slope = sys.gradient().dot(dx);
      const double lam2 = -slope;
      ++steps;
      if (!(lam2 > 2.0 * opt.newton_tol)) break;
      // Near the roundoff floor centering can crawl; accept the point.
      if (++local > opt.max_center_steps) break;
      double s = MaxLinearStep(prob, lay, x, dx);
      const bool quadratic = lam2 < 0.04;
      // Roundoff floor: the decrement is tiny but steps no longer reduce f.
      if (quadratic && ++quad_steps > 12) break;
      double fn = kInf;
      VectorXd xn;
      int tries = 0;
      for (; tries < 60; ++tries) {
        xn = x + s * dx;
        fn = BarrierValue(prob, lay, xn, t, opt.parallel);
        const double tol = 1e-13 * std::max(1.0, std::abs(fx));
        if (std::isfinite(fn) && (quadratic || fn <= fx + 0.01 * s * slope + tol)) break;
        s *= 0.5;
      }
      if (tries == 60 || s < 1e-14) break;  // no progress possible at this t
      // Roundoff floor away from the quadratic region: tiny damped steps that
      // barely move f.
      const bool tiny = s < 1e-3 && fx - fn <= 1e-11 * std::max(1.0, std::abs(fx));
      stalled = tiny ? stalled + 1 : 0;
      if (stalled > 5) break;
      x = xn;
      fx = fn;
      if (opt.stop && opt.stop(x)) {
        res.status = Status::kStopped;
        break;
      }
    }
    if (res.status != Status::kOptimal) break;
    const double obj = prob.Objective(x);
    const double target = std::max(opt.gap_abs, opt.gap_rel * std::abs(obj));
    if (m / t <= target * (1.0 + 1e-12)) break;
    // Land the last increase exactly on the target gap.
    t = std::min(t * opt.mu, m / target);
  }
  res.x = x;
  res.objective = prob.Objective(x);
  res.t_final = t;
  res.newton_steps = steps;
  return res;
}

}  // namespace uavsec::barrier
