// Serial reference versus OpenMP kernels. Arg 0 selects serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "doqkd/commands.hpp"
#include "doqkd/montecarlo.hpp"
#include "doqkd/security_bounds.hpp"

namespace {

doqkd::Exec exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? doqkd::Exec::serial : doqkd::Exec::parallel;
}

void BM_Simulate(benchmark::State& state) {
  doqkd::SimConfig cfg;
  cfg.n_frames = 200'000;
  for (auto _ : state) {
    auto out = doqkd::simulate(cfg, exec_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.n_frames));
}
BENCHMARK(BM_Simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_WorstCase(benchmark::State& state) {
  const doqkd::Scenario sc;
  const double xi = doqkd::xi_from_sigma_delta(10.0, sc.src.sigma_cor_ps);
  for (auto _ : state) benchmark::DoNotOptimize(doqkd::worst_case_capacity(xi, sc, exec_of(state)));
}
BENCHMARK(BM_WorstCase)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SweepLength(benchmark::State& state) {
  doqkd::RunConfig cfg;
  cfg.sweep.length_km = {0.0, 300.0, 61};
  for (auto _ : state) {
    auto rows = doqkd::sweep_length(cfg, exec_of(state));
    benchmark::DoNotOptimize(rows.data());
  }
}
BENCHMARK(BM_SweepLength)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
