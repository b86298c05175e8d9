#include <benchmark/benchmark.h>

#include <random>

#include "dda/wls.hpp"

using namespace dda;

namespace {

struct Instance {
  DesignMatrix data;
  SampleWeights weights;
};

Instance make_instance(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Instance inst;
  inst.data.X.resize(n, m);
  inst.data.y.resize(n);
  inst.weights.q.resize(n);
  std::uniform_real_distribution<double> pick_q(0.2, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) inst.data.X(i, j) = gauss(rng);
    inst.data.y[i] = gauss(rng);
    inst.weights.q[i] = pick_q(rng);
  }
  inst.weights.normalization = WeightNormalization::raw;
  return inst;
}

}  // namespace

static void BM_SolveWls(benchmark::State& state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)),
                                  static_cast<int>(state.range(1)), 1);
  for (auto _ : state) {
    auto sol = solve_wls(inst.data, inst.weights, kDefaultRidge);
    benchmark::DoNotOptimize(sol.phi());
  }
}
BENCHMARK(BM_SolveWls)->Args({400, 11})->Args({2000, 11})->Args({400, 50});

static void BM_HypergradientQ(benchmark::State& state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)),
                                  static_cast<int>(state.range(1)), 2);
  const auto sol = solve_wls(inst.data, inst.weights, kDefaultRidge);
  const Eigen::VectorXd upper = Eigen::VectorXd::Ones(inst.data.X.cols());
  for (auto _ : state) {
    auto g = hypergradient_q(inst.data, inst.weights, sol, upper);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_HypergradientQ)->Args({400, 11})->Args({2000, 11});

static void BM_WlsLoss(benchmark::State& state) {
  const auto inst = make_instance(static_cast<int>(state.range(0)), 11, 3);
  const auto sol = solve_wls(inst.data, inst.weights, kDefaultRidge);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wls_loss(inst.data, inst.weights, sol.phi()));
  }
}
BENCHMARK(BM_WlsLoss)->Arg(400)->Arg(4000);
