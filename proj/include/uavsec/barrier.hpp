#pragma once

// Primal log-barrier interior-point solver used behind the sub-problem
// builders. Problems are "maximize concave objective subject to convex
// constraints" with a block-diagonal-plus-low-rank Newton system.

#include <Eigen/Core>
#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace uavsec::barrier {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;

// Smooth concave function of a few variables.
class SmoothTerm {
 public:
  explicit SmoothTerm(std::vector<int> idx) : idx_(std::move(idx)) {}
  virtual ~SmoothTerm() = default;
  const std::vector<int>& idx() const { return idx_; }
  // Gathers the local variables and evaluates. Returns false outside the domain.
  bool Eval(const VectorXd& x, double* val, VectorXd* grad, MatrixXd* hess) const;

 protected:
  virtual bool EvalLocal(const VectorXd& z, double* val, VectorXd* grad,
                         MatrixXd* hess) const = 0;

 private:
  std::vector<int> idx_;
};

// c + b^T z
class AffineTerm : public SmoothTerm {
 public:
  AffineTerm(std::vector<int> idx, VectorXd b, double c = 0.0);

 protected:
  bool EvalLocal(const VectorXd& z, double* val, VectorXd* grad, MatrixXd* hess) const override;

 private:
  VectorXd b_;
  double c_;
};

// c + b^T z - z^T Q z, Q symmetric PSD.
class ConcaveQuadTerm : public SmoothTerm {
 public:
  ConcaveQuadTerm(std::vector<int> idx, MatrixXd Q, VectorXd b, double c = 0.0);

 protected:
  bool EvalLocal(const VectorXd& z, double* val, VectorXd* grad, MatrixXd* hess) const override;

 private:
  MatrixXd Q_;
  VectorXd b_;
  double c_;
};

// coef * s * log(1 + y/s) with y = y0 + g^T z_y. s is the first local variable,
// or the constant s_const when has_s is false.
class PerspectiveLogTerm : public SmoothTerm {
 public:
  PerspectiveLogTerm(int s_var, std::vector<int> y_idx, VectorXd g, double y0, double coef);
  PerspectiveLogTerm(double s_const, std::vector<int> y_idx, VectorXd g, double y0,
                     double coef);

 protected:
  bool EvalLocal(const VectorXd& z, double* val, VectorXd* grad, MatrixXd* hess) const override;

 private:
  bool has_s_;
  double s_const_;
  VectorXd g_;
  double y0_;
  double coef_;
};

// -coef / z, z > 0.
class NegReciprocalTerm : public SmoothTerm {
 public:
  NegReciprocalTerm(int var, double coef);

 protected:
  bool EvalLocal(const VectorXd& z, double* val, VectorXd* grad, MatrixXd* hess) const override;

 private:
  double coef_;
};

// -coef * z^3, z >= 0.
class NegCubeTerm : public SmoothTerm {
 public:
  NegCubeTerm(int var, double coef);

 protected:
  bool EvalLocal(const VectorXd& z, double* val, VectorXd* grad, MatrixXd* hess) const override;

 private:
  double coef_;
};

// a^T x <= rhs
struct LinearIneq {
  std::vector<int> idx;
  std::vector<double> coef;
  double rhs = 0.0;
  int group = 0;
};

// sum(terms) >= 0 with every term concave.
struct SmoothIneq {
  std::vector<std::shared_ptr<SmoothTerm>> terms;
  int group = 0;
};

// ||A z + a|| <= c^T z + d on local variables z = x[idx].
struct SocIneq {
  std::vector<int> idx;
  MatrixXd A;
  VectorXd a;
  VectorXd c;
  double d = 0.0;
  int group = 0;
};

// F0 + sum_l x[scalar_idx[l]] * scalar_coef[l] + sum_b sign_b * Herm(x[herm_offset[b] ...]) >= 0
// (Hermitian n x n). Herm() maps n*n reals to a Hermitian matrix, see HermFromParams.
struct LmiIneq {
  int n = 0;
  CMat F0;
  std::vector<int> scalar_idx;
  std::vector<CMat> scalar_coef;
  std::vector<int> herm_offset;
  std::vector<double> herm_sign;
  int group = 0;
};

// a^T x == rhs
struct LinearEq {
  std::vector<int> idx;
  std::vector<double> coef;
  double rhs = 0.0;
};

// Hermitian parametrization: diagonal entries first, then (Re, Im) of each
// strictly upper entry in row-major order.
int HermDim(int n);
CMat HermFromParams(const double* x, int n);
void HermToParams(const CMat& Z, double* x);
// Coefficients v with Re Tr(H Herm(x)) = v^T x.
VectorXd TraceCoeffs(const CMat& H);

class Problem {
 public:
  Problem() = default;

  int AddVariables(int count);  // returns first index
  int num_vars() const { return num_vars_; }
  // Contiguous blocks; starts[0] == 0, starts.back() == num_vars.
  void SetBlocks(std::vector<int> starts) { block_starts_ = std::move(starts); }
  const std::vector<int>& block_starts() const { return block_starts_; }

  int AddGroup(const std::string& name);
  const std::string& GroupName(int g) const { return groups_[g]; }

  void AddLinearObjective(int var, double coef);
  void AddObjectiveTerm(std::shared_ptr<SmoothTerm> term) { obj_terms_.push_back(std::move(term)); }
  void AddObjectiveConstant(double c) { obj_const_ += c; }

  void AddLinearIneq(LinearIneq c) { lin_.push_back(std::move(c)); }
  void AddSmoothIneq(SmoothIneq c) { smooth_.push_back(std::move(c)); }
  void AddSoc(SocIneq c) { soc_.push_back(std::move(c)); }
  void AddLmi(LmiIneq c) { lmi_.push_back(std::move(c)); }
  void AddLinearEq(LinearEq c) { eq_.push_back(std::move(c)); }

  // Helpers for the common bounds.
  void AddLowerBound(int var, double lo, int group);
  void AddUpperBound(int var, double hi, int group);

  double Objective(const VectorXd& x) const;
  // Name of the first group whose constraint is not strictly satisfied, or "".
  std::string FirstViolatedGroup(const VectorXd& x) const;
  double BarrierDegree() const;

  const VectorXd& linear_objective() const { return c_; }
  const std::vector<std::shared_ptr<SmoothTerm>>& objective_terms() const { return obj_terms_; }
  const std::vector<LinearIneq>& linear() const { return lin_; }
  const std::vector<SmoothIneq>& smooth() const { return smooth_; }
  const std::vector<SocIneq>& soc() const { return soc_; }
  const std::vector<LmiIneq>& lmi() const { return lmi_; }
  const std::vector<LinearEq>& equalities() const { return eq_; }

 private:
  int num_vars_ = 0;
  std::vector<int> block_starts_;
  std::vector<std::string> groups_;
  VectorXd c_;
  double obj_const_ = 0.0;
  std::vector<std::shared_ptr<SmoothTerm>> obj_terms_;
  std::vector<LinearIneq> lin_;
  std::vector<SmoothIneq> smooth_;
  std::vector<SocIneq> soc_;
  std::vector<LmiIneq> lmi_;
  std::vector<LinearEq> eq_;
};

enum class Status { kOptimal, kMaxIterations, kNumerical, kInfeasibleStart, kStopped };

std::string ToString(Status s);

struct Options {
  double t0 = 1.0;
  double mu = 20.0;
  double gap_abs = 1e-9;
  double gap_rel = 1e-10;
  double newton_tol = 1e-9;  // on lambda^2 / 2
  int max_newton = 3000;
  int max_center_steps = 100;  // per value of t
  bool parallel = true;  // OpenMP block kernel; false runs the serial reference
  // Optional early exit, checked after every Newton step.
  std::function<bool(const VectorXd&)> stop;
};

struct Result {
  Status status = Status::kNumerical;
  VectorXd x;
  double objective = 0.0;
  double t_final = 0.0;
  int newton_steps = 0;
  std::string message;
};

Result Solve(const Problem& prob, const VectorXd& x0, const Options& opt = {});

// One Newton direction of the centering problem at (x, t); exposed so the
// parallel and serial kernels can be compared.
VectorXd NewtonDirection(const Problem& prob, const VectorXd& x, double t, bool parallel);

}  // namespace uavsec::barrier
