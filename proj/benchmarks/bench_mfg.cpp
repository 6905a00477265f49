#include <benchmark/benchmark.h>

#include "instances.hpp"
#include "mfg/equilibrium.hpp"
#include "mfg/riccati.hpp"
#include "mfg/simulate.hpp"

namespace {

using namespace mfg;

void BM_SolveBeta(benchmark::State& state) {
    const auto p = testing::benchmark();
    const TimeGrid grid(1.0, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve_beta(p, grid));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveBeta)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_Picard(benchmark::State& state) {
    const auto p = testing::benchmark();
    const auto grid = default_grid(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium_picard(p, grid));
}
BENCHMARK(BM_Picard)->Unit(benchmark::kMillisecond);

void BM_ClosedForm(benchmark::State& state) {
    const auto p = testing::benchmark();
    const auto grid = default_grid(1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium_closed_form(p, grid));
}
BENCHMARK(BM_ClosedForm)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    SimConfig cfg;
    cfg.n_paths = static_cast<std::size_t>(state.range(0));
    cfg.workers = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_paths(p, Policy::equilibrium(eq.value), eq.m, cfg));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(2048)->Arg(16384)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
