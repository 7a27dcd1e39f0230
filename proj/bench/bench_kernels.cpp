#include <benchmark/benchmark.h>

#include "seqband/gos.hpp"
#include "seqband/montecarlo.hpp"
#include "seqband/weight.hpp"

using namespace seqband;

namespace {

struct Fixture {
    WeightFn w = WeightFn::power_plus(0.75, 0.5);
    SupGrid grid;
    SupProblem problem;

    explicit Fixture(std::size_t points)
        : grid(SupGrid::geometric(grid_z_min(w.floor()), auto_z_max([this](double z) { return w(z); }), points))
    {
        problem.grid = &grid;
        problem.g0 = w.floor();
        for (double t : grid.times()) {
            problem.g.push_back(w(t));
        }
    }
};

void BM_SupDrawFused(benchmark::State& state)
{
    Fixture f(static_cast<std::size_t>(state.range(0)));
    std::size_t rep = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sup_draw(f.problem, 1, rep++));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SupDrawFused)->Arg(1024)->Arg(4096);

void BM_SupDrawReference(benchmark::State& state)
{
    Fixture f(static_cast<std::size_t>(state.range(0)));
    std::size_t rep = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sup_draw_reference(f.problem, 1, rep++));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SupDrawReference)->Arg(1024)->Arg(4096);

void BM_SupDraws(benchmark::State& state)
{
    Fixture f(4096);
    const auto exec = state.range(0) == 0 ? Execution::serial : Execution::parallel;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sup_draws(f.problem, 2000, 7, exec));
    }
    state.SetItemsProcessed(state.iterations() * 2000);
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
}
BENCHMARK(BM_SupDraws)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_KgammaDraws(benchmark::State& state)
{
    const LoadSharingParams params({10.0, 9.0, 11.0, 13.0});
    McConfig config;
    config.n_reps = 2000;
    const auto exec = state.range(1) == 0 ? Execution::serial : Execution::parallel;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kgamma_draws(params, static_cast<std::size_t>(state.range(0)), KsWeight::unit(),
                                              EstimatorFlavor::product, config, exec));
    }
    state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_KgammaDraws)->Args({20, 0})->Args({20, 1})->Args({400, 1})->Unit(benchmark::kMillisecond);

void BM_SampleGos(benchmark::State& state)
{
    const LoadSharingParams params({3.0, 2.62, 1.25});
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_gos(params, Baseline::exponential(), 5000, seed++));
    }
    state.SetItemsProcessed(state.iterations() * 5000);
}
BENCHMARK(BM_SampleGos)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
