#include <benchmark/benchmark.h>

#include <vector>

#include "ipmlab/diagnostics.hpp"
#include "ipmlab/init_law.hpp"
#include "ipmlab/ipm.hpp"
#include "ipmlab/kernel.hpp"
#include "ipmlab/objective.hpp"
#include "ipmlab/operators.hpp"
#include "ipmlab/random.hpp"

namespace {

using namespace ipmlab;

Objective bump() { return gaussian_bump_objective(0.1, 1.0, 1.0, 2.0, Box::cube(1, -10.0, 10.0)); }

void BM_PhiloxUniform(benchmark::State& state) {
  RandomStream rng(42);
  double acc = 0.0;
  for (auto _ : state) acc += rng.uniform();
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxUniform);

void BM_PhiloxNormal(benchmark::State& state) {
  RandomStream rng(42);
  double acc = 0.0;
  for (auto _ : state) acc += rng.normal();
  benchmark::DoNotOptimize(acc);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormal);

void BM_GridSelectionMutationStep(benchmark::State& state) {
  const auto bins = static_cast<std::size_t>(state.range(0));
  const auto grid = ipm::MarginalDensityGrid::from_law(GaussianLaw{0.0, 1.0}, -10.0, 10.0, bins);
  const auto obj = bump();
  const auto kernel = MutationKernel::gaussian(0.5);
  for (auto _ : state) {
    auto step = ipm::grid_selection_mutation_step(grid, obj, kernel);
    benchmark::DoNotOptimize(step.leaked_mass);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GridSelectionMutationStep)->RangeMultiplier(2)->Range(256, 2048)->Complexity();

void BM_SimpleEaStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto obj = bump();
  const auto kernel = MutationKernel::gaussian(0.5);
  const auto pop = sample_initial_population(GaussianLaw{0.0, 1.0}, n, 1, RandomStream(1));
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto next = operators::simple_ea_step(pop, obj, kernel, RandomStream(7).derive(i++));
    benchmark::DoNotOptimize(next.coords().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SimpleEaStep)->Arg(8)->Arg(128)->Arg(1024);

void BM_KsTwoSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomStream rng(3);
  std::vector<double> a(n), b(n);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(diagnostics::ks_statistic(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KsTwoSample)->RangeMultiplier(4)->Range(1 << 10, 1 << 16)->Complexity();

}  // namespace

BENCHMARK_MAIN();
