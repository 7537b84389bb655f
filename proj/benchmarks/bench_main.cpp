#include "tvf/densities.hpp"
#include "tvf/estimators.hpp"
#include "tvf/metrics.hpp"
#include "tvf/simharness.hpp"
#include "tvf/vfold.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

std::vector<std::size_t> bins_upto(std::size_t m)
{
  std::vector<std::size_t> b(m);
  for (std::size_t i = 0; i < m; ++i)
    b[i] = i + 1;
  return b;
}

void BM_HellingerHistograms(benchmark::State& state)
{
  const auto xs = tvf::find_density("s2").sample(500, 1);
  const auto support = tvf::data_support(xs);
  const auto a = tvf::fit_histogram(xs, static_cast<std::size_t>(state.range(0)), support);
  const auto b = tvf::fit_histogram(xs, static_cast<std::size_t>(state.range(0)) + 7, support);
  for (auto _ : state)
    benchmark::DoNotOptimize(tvf::hellinger_sq(a, b, {}));
}
BENCHMARK(BM_HellingerHistograms)->Arg(10)->Arg(100)->Arg(1000);

void BM_HellingerKernels(benchmark::State& state)
{
  const auto xs = tvf::find_density("s22").sample(static_cast<std::size_t>(state.range(0)), 2);
  const auto a = tvf::fit_kernel(xs, 0.1);
  const auto b = tvf::fit_kernel(xs, 0.3);
  for (auto _ : state)
    benchmark::DoNotOptimize(tvf::hellinger_sq(a, b, {}));
}
BENCHMARK(BM_HellingerKernels)->Arg(100)->Arg(500);

// Selection only: the workspace is rebuilt each iteration so no memoized
// test survives, but its construction is excluded from the timing.
template<bool Fast>
void BM_Select(benchmark::State& state)
{
  const std::size_t n = 500;
  const auto xs = tvf::find_density("s1").sample(n, 3);
  const auto bins = bins_upto(static_cast<std::size_t>(state.range(0)));
  const auto family = tvf::histogram_family(bins, tvf::sample_range(xs));
  const auto splits = tvf::make_splits(n, 5, 4);
  const tvf::FoldWorkspace proto(family, xs, splits, {});
  for (auto _ : state) {
    state.PauseTiming();
    tvf::FoldWorkspace ws(family, xs, splits, proto.partials(), {});
    state.ResumeTiming();
    benchmark::DoNotOptimize(Fast ? tvf::select_fast(ws).chosen : tvf::select_naive(ws).chosen);
  }
}
BENCHMARK_TEMPLATE(BM_Select, true)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_TEMPLATE(BM_Select, false)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_Replication(benchmark::State& state)
{
  tvf::SimulationSetup setup;
  setup.density = "s2";
  setup.n = 500;
  setup.folds = 5;
  setup.replications = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tvf::empirical_risk(setup, {}).mean_risk);
    ++setup.seed;
  }
}
BENCHMARK(BM_Replication)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
