// Microbenchmarks for the hot paths: the stopping controller, the splitter,
// the learners, and a full evaluate_run in both modes. The Simulate /
// EarlyStop pair makes the fold savings directly visible in wall time.

#include "efold/controller.hpp"
#include "efold/harness.hpp"
#include "efold/ingestion.hpp"
#include "efold/learners.hpp"
#include "efold/rng.hpp"
#include "efold/splitting.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace efold;

Dataset blobs(int classes, int per_class, int dims, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.name = "bench-blobs";
  GaussianBlobs kind;
  kind.classes = classes;
  kind.per_class = per_class;
  kind.dims = dims;
  kind.spread = 1.5;
  kind.seed = seed;
  spec.kind = kind;
  return generate(spec);
}

Dataset trend(int n, int dims, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.name = "bench-trend";
  LinearTrend kind;
  kind.n = n;
  kind.dims = dims;
  kind.noise_std = 2.0;
  kind.seed = seed;
  spec.kind = kind;
  return generate(spec);
}

void BM_ControllerRunSequence(benchmark::State& state) {
  const EfoldConfig config;
  Rng rng(42);
  std::vector<std::vector<double>> traces(256);
  for (auto& trace : traces) {
    const double base = 0.4 + 0.5 * rng.uniform01();
    trace.resize(static_cast<std::size_t>(config.e_max));
    for (double& score : trace) score = base + 0.01 * rng.normal();
  }
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_sequence(config, traces[i]));
    i = (i + 1) % traces.size();
  }
}
BENCHMARK(BM_ControllerRunSequence);

void BM_StratifiedKfold(benchmark::State& state) {
  const Dataset dataset =
      blobs(5, static_cast<int>(state.range(0)) / 5, 8, 7);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(stratified_kfold(dataset, 10, seed++));
  }
}
BENCHMARK(BM_StratifiedKfold)->Arg(500)->Arg(5000);

void BM_FitClassifier(benchmark::State& state) {
  const Dataset dataset = blobs(3, 100, 6, 11);
  const LearnerSpec spec{static_cast<LearnerKind>(state.range(0)), {}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        fit(spec, dataset.features, dataset.target, dataset.class_count));
  }
}
BENCHMARK(BM_FitClassifier)
    ->Arg(static_cast<int>(LearnerKind::GaussianNB))
    ->Arg(static_cast<int>(LearnerKind::DecisionTreeClassifier))
    ->Arg(static_cast<int>(LearnerKind::AdaBoost))
    ->Arg(static_cast<int>(LearnerKind::LogisticRegression));

void BM_FitRegressor(benchmark::State& state) {
  const Dataset dataset = trend(300, 8, 13);
  const LearnerSpec spec{static_cast<LearnerKind>(state.range(0)), {}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(spec, dataset.features, dataset.target, 0));
  }
}
BENCHMARK(BM_FitRegressor)
    ->Arg(static_cast<int>(LearnerKind::LinearRegression))
    ->Arg(static_cast<int>(LearnerKind::Ridge))
    ->Arg(static_cast<int>(LearnerKind::Lasso))
    ->Arg(static_cast<int>(LearnerKind::DecisionTreeRegressor));

void BM_EvaluateRun(benchmark::State& state) {
  const Dataset dataset = blobs(3, 60, 5, 17);
  const LearnerSpec spec{LearnerKind::GaussianNB, {}};
  const EfoldConfig config;
  const RunMode mode = state.range(0) == 0 ? RunMode::Simulate : RunMode::EarlyStop;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_run(dataset, spec, config, seed++, mode));
  }
}
BENCHMARK(BM_EvaluateRun)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
