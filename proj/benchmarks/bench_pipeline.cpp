#include <benchmark/benchmark.h>

#include "dda/drift_gen.hpp"
#include "dda/trainer.hpp"

using namespace dda;

namespace {

std::vector<AdaptationTask> bench_tasks() {
  GradualDriftSpec spec;
  spec.feature_dim = 10;
  spec.total_length = 1000;
  spec.rotation_rate = 0.005;
  spec.noise_std = 0.1;
  spec.seed = 7;
  spec.period_length = 15;
  return generate_tasks(generate_gradual(spec).stream, 400, 20, 20);
}

TrainConfig bench_config() {
  TrainConfig cfg;
  cfg.lags = 3;
  return cfg;
}

}  // namespace

static void BM_ExtractFeatures(benchmark::State& state) {
  const auto tasks = bench_tasks();
  for (auto _ : state) {
    auto feats = extract_features(tasks.front(), 15, 3);
    benchmark::DoNotOptimize(feats.values);
  }
}
BENCHMARK(BM_ExtractFeatures);

static void BM_TaskLossClosedForm(benchmark::State& state) {
  const auto tasks = bench_tasks();
  const auto cfg = bench_config();
  const auto ctx = make_task_context(tasks.front(), cfg);
  const auto model = make_resampler(cfg.lags);
  for (auto _ : state) {
    auto res = task_loss(model, ctx, cfg);
    benchmark::DoNotOptimize(res.loss);
  }
}
BENCHMARK(BM_TaskLossClosedForm);

static void BM_TaskLossGho(benchmark::State& state) {
  const auto tasks = bench_tasks();
  TrainConfig cfg = bench_config();
  cfg.optimizer_path = OptimizerPath::gho;
  cfg.gho_steps = static_cast<int>(state.range(0));
  const auto ctx = make_task_context(tasks.front(), cfg);
  const auto model = make_resampler(cfg.lags);
  for (auto _ : state) {
    auto res = task_loss(model, ctx, cfg);
    benchmark::DoNotOptimize(res.loss);
  }
}
BENCHMARK(BM_TaskLossGho)->Arg(10)->Arg(100)->Arg(1000);

static void BM_TrainEpoch(benchmark::State& state) {
  const auto tasks = bench_tasks();
  TrainConfig cfg = bench_config();
  cfg.epochs = 1;
  for (auto _ : state) {
    auto trained = train(tasks, cfg);
    benchmark::DoNotOptimize(trained.model.parameters());
  }
}
BENCHMARK(BM_TrainEpoch);

BENCHMARK_MAIN();
