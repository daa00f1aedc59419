#include <benchmark/benchmark.h>

#include "slln/kernels.hpp"
#include "slln/standard_suite.hpp"

namespace {

using namespace slln;

const NamedEnsemble& bench_ensemble() {
  static const NamedEnsemble e = random_nonnormal_ensemble(SpaceModel::sequence(2.0, 4), 1.0, 11);
  return e;
}

PreparedSweep make_sweep(std::size_t n) {
  const auto& e = bench_ensemble();
  return PreparedSweep(SweepSpec{e.ensemble, basis_element(e.ensemble.model(), 0).coords, std::nullopt,
                                 std::nullopt, TimeGrid(1.0, 33), Centering::limit, n, 7, 256});
}

void BM_SweepSerial(benchmark::State& state) {
  const auto sweep = make_sweep(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::sweep(sweep));
}

void BM_SweepOmp(benchmark::State& state) {
  const auto sweep = make_sweep(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::sweep(sweep));
}

DecompositionContext make_context(std::size_t n) {
  const auto& e = bench_ensemble();
  return DecompositionContext(sample_iid(e.ensemble, n, 3), e.ensemble, n, 0.5);
}

void BM_ExpansionSerial(benchmark::State& state) {
  const auto ctx = make_context(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::expansion_sum(ctx));
}

void BM_ExpansionOmp(benchmark::State& state) {
  const auto ctx = make_context(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::expansion_sum(ctx));
}

void BM_CoveringSerial(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::covering_tuple_counts(static_cast<unsigned>(state.range(0))));
}

void BM_CoveringOmp(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kernels::omp::covering_tuple_counts(static_cast<unsigned>(state.range(0))));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepOmp)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpansionSerial)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpansionOmp)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoveringSerial)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CoveringOmp)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
