#include <benchmark/benchmark.h>

#include "uavsec/barrier.hpp"

using namespace uavsec::barrier;

namespace {

// Many independent blocks with perspective logs and a shared budget row.
Problem Blocks(int blocks) {
  Problem q;
  std::vector<int> starts;
  for (int b = 0; b < blocks; ++b) starts.push_back(q.AddVariables(4));
  starts.push_back(q.num_vars());
  q.SetBlocks(starts);
  const int g = q.AddGroup("box");
  LinearIneq budget;
  budget.rhs = 0.5 * blocks;
  budget.group = g;
  for (int v = 0; v < q.num_vars(); ++v) {
    q.AddLowerBound(v, 0.0, g);
    q.AddUpperBound(v, 2.0, g);
    budget.idx.push_back(v);
    budget.coef.push_back(1.0);
  }
  q.AddLinearIneq(budget);
  for (int b = 0; b < blocks; ++b) {
    q.AddObjectiveTerm(std::make_shared<PerspectiveLogTerm>(
        1.0 + 0.01 * b, std::vector<int>{4 * b}, Eigen::VectorXd::Ones(1), 0.0, 1.0));
    q.AddLinearObjective(4 * b + 1, -0.1);
  }
  return q;
}

void BM_NewtonDirection(benchmark::State& st) {
  const Problem q = Blocks(static_cast<int>(st.range(0)));
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(q.num_vars(), 0.1);
  for (auto _ : st) benchmark::DoNotOptimize(NewtonDirection(q, x, 10.0, st.range(1) != 0));
}
BENCHMARK(BM_NewtonDirection)->ArgsProduct({{16, 128, 512}, {0, 1}});

void BM_Solve(benchmark::State& st) {
  const Problem q = Blocks(static_cast<int>(st.range(0)));
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(q.num_vars(), 0.1);
  Options o;
  o.parallel = st.range(1) != 0;
  for (auto _ : st) benchmark::DoNotOptimize(Solve(q, x, o));
}
BENCHMARK(BM_Solve)->ArgsProduct({{16, 128}, {0, 1}});

}  // namespace

BENCHMARK_MAIN();
