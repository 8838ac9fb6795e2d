#include "uavsec/fractional.hpp"

#include <cmath>

namespace uavsec {

RatioResult MaximizeRatio(const ParametricProgram& prog, double q0) {
  if (q0 < 0.0) throw std::invalid_argument("initial ratio must be nonnegative");
  RatioResult out;
  double q = q0;
  double best_ratio = -INFINITY;
  for (int it = 1; it <= prog.max_iters; ++it) {
    ParametricSolution sol;
    try {
      sol = prog.evaluate(q);
    } catch (const SubproblemInfeasible& e) {
      throw SubproblemInfeasible(e.what(), q);
    }
    if (!(sol.D > 0.0)) throw std::runtime_error("ratio denominator must be positive");
    const double residual = sol.N - q * sol.D;
    out.q_trace.push_back(q);
    out.residual_trace.push_back(residual);
    out.iterations = it;
    const double ratio = sol.N / sol.D;
    if (std::abs(residual) <= prog.eps2 * sol.D) {
      out.x_best = sol.x;
      out.q_final = q;
      out.residual = residual;
      out.N = sol.N;
      out.D = sol.D;
      out.converged = true;
      return out;
    }
    if (ratio > best_ratio) {
      best_ratio = ratio;
      out.x_best = sol.x;
      out.q_final = ratio;
      out.residual = residual;
      out.N = sol.N;
      out.D = sol.D;
    }
    q = ratio;
  }
  out.converged = false;
  return out;
}

}  // namespace uavsec
