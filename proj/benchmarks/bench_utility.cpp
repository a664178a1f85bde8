#include <random>

#include <benchmark/benchmark.h>

#include "qgauge/assessment.hpp"
#include "qgauge/model.hpp"

using namespace qgauge;

static void BM_PiecewiseLinear(benchmark::State& state) {
  PiecewiseLinear pl;
  for (int i = 0; i < state.range(0); ++i) pl.points.push_back({double(i), i % 2 ? 1.0 : 0.0});
  const UtilityFunction u = pl;
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_utility(u, x));
    x += 0.37;
    if (x > state.range(0)) x = 0.0;
  }
}
BENCHMARK(BM_PiecewiseLinear)->Arg(2)->Arg(8)->Arg(64);

static void BM_Step(benchmark::State& state) {
  const UtilityFunction u = StepFunction{10, 1, 0};
  double x = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_utility(u, x));
    x = x > 20 ? 0 : x + 1;
  }
}
BENCHMARK(BM_Step);

static void BM_AggregateChildren(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0, 1);
  std::vector<ChildValue> children;
  for (int i = 0; i < state.range(0); ++i) {
    std::optional<double> v;
    if (i % 5) v = unit(rng);
    children.push_back({v, 1.0 / static_cast<double>(state.range(0))});
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate_children(children));
}
BENCHMARK(BM_AggregateChildren)->Arg(4)->Arg(32)->Arg(256);
