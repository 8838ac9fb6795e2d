#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "uavsec/fractional.hpp"

using namespace uavsec;

namespace {

Eigen::VectorXd Scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

// log(1+x)/(1+x) on [0,10]: the parametric argmax is closed form.
ParametricProgram LogOverLinear() {
  ParametricProgram p;
  p.evaluate = [](double q) {
    const double x = q > 0 ? std::clamp(1.0 / q - 1.0, 0.0, 10.0) : 10.0;
    return ParametricSolution{Scalar(x), std::log1p(x), 1.0 + x};
  };
  p.max_iters = 50;
  return p;
}

double GoldenMax(double (*f)(double), double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  while (b - a > 1e-12) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) > f(d)) b = d; else a = c;
  }
  return f(0.5 * (a + b));
}

}  // namespace

TEST_CASE("singleton feasible set") {
  ParametricProgram p;
  p.evaluate = [](double) { return ParametricSolution{Scalar(0), 10.0, 2.0}; };
  const RatioResult r = MaximizeRatio(p, 0.0);
  CHECK(r.converged);
  CHECK(r.q_final == 5.0);
  CHECK(r.residual == 0.0);
  CHECK(r.iterations == 2);
}

TEST_CASE("linear over a box") {
  ParametricProgram p;
  p.evaluate = [](double) { return ParametricSolution{Scalar(1), 1.0, 1.0}; };
  const RatioResult r = MaximizeRatio(p);
  CHECK(r.q_final == 1.0);
  CHECK(r.x_best[0] == 1.0);
}

TEST_CASE("log over linear matches a golden-section search") {
  const RatioResult r = MaximizeRatio(LogOverLinear(), 0.0);
  CHECK(r.converged);
  const double brute = GoldenMax([](double x) { return std::log1p(x) / (1.0 + x); }, 0.0, 10.0);
  CHECK(std::abs(r.q_final - brute) < 1e-6);
  CHECK(std::abs(r.residual) <= 1e-6 * r.D);
  for (size_t i = 1; i < r.q_trace.size(); ++i) CHECK(r.q_trace[i] >= r.q_trace[i - 1]);
}

TEST_CASE("F(q) is nonincreasing and crosses zero at the optimum") {
  const ParametricProgram p = LogOverLinear();
  const double qstar = 1.0 / std::exp(1.0);
  double prev = INFINITY;
  for (double q = 0.05; q < 1.0; q += 0.05) {
    const ParametricSolution s = p.evaluate(q);
    const double F = s.N - q * s.D;
    CHECK(F <= prev);
    prev = F;
    if (q < qstar) CHECK(F > 0);
    if (q > qstar) CHECK(F < 0);
  }
}

TEST_CASE("deterministic traces") {
  const RatioResult a = MaximizeRatio(LogOverLinear());
  const RatioResult b = MaximizeRatio(LogOverLinear());
  CHECK(a.q_trace == b.q_trace);
  CHECK(a.residual_trace == b.residual_trace);
}

TEST_CASE("infeasibility propagates with the failing ratio") {
  ParametricProgram p;
  p.evaluate = [](double q) -> ParametricSolution {
    if (q > 0) throw SubproblemInfeasible("C6", 0.0);
    return ParametricSolution{Scalar(0), 3.0, 1.0};
  };
  try {
    MaximizeRatio(p);
    FAIL("expected SubproblemInfeasible");
  } catch (const SubproblemInfeasible& e) {
    CHECK(e.q() == 3.0);
    CHECK(std::string(e.what()) == "C6");
  }
  CHECK_THROWS_AS(MaximizeRatio(p, -1.0), std::invalid_argument);
}

TEST_CASE("non-convergence returns the best iterate flagged") {
  ParametricProgram p;
  p.max_iters = 3;
  int calls = 0;
  // Alternates between two points and never settles.
  p.evaluate = [&calls](double) {
    ++calls;
    return calls % 2 ? ParametricSolution{Scalar(1), 1.0, 1.0}
                     : ParametricSolution{Scalar(2), 4.0, 1.0};
  };
  const RatioResult r = MaximizeRatio(p);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.q_final == 4.0);
  CHECK(r.x_best[0] == 2.0);
}
