#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavsec {

// Result of one parametric solve: argmax of N(x) - q D(x) and its N, D.
struct ParametricSolution {
  Eigen::VectorXd x;
  double N = 0.0;
  double D = 1.0;
};

struct ParametricProgram {
  std::function<ParametricSolution(double q)> evaluate;
  double eps2 = 1e-6;  // relative to D
  int max_iters = 10;
};

struct RatioResult {
  Eigen::VectorXd x_best;
  double q_final = 0.0;
  double residual = 0.0;  // N - q D at x_best
  double N = 0.0;
  double D = 1.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> q_trace;
  std::vector<double> residual_trace;
};

// Thrown by an evaluator (or rethrown by the engine) when the parametric
// program has no feasible point.
class SubproblemInfeasible : public std::runtime_error {
 public:
  SubproblemInfeasible(const std::string& what, double q)
      : std::runtime_error(what), q_(q) {}
  double q() const { return q_; }

 private:
  double q_;
};

RatioResult MaximizeRatio(const ParametricProgram& prog, double q0 = 0.0);

}  // namespace uavsec
