#include <benchmark/benchmark.h>

#include <vector>

#include "swarmphase/sweep.hpp"

using namespace swarmphase;

namespace {

ParamGrid bench_grid() {
    ParamGrid g;
    g.base.horizon = 30.0;
    g.axes = {Axis{SweepParam::N, {4, 6, 8, 10}}, Axis{SweepParam::Phi, {30, 60}}};
    g.trials_per_point = 2;
    g.base_seed = 5;
    return g;
}

std::vector<WorkUnit> all_units(const ParamGrid& g) {
    std::vector<WorkUnit> units;
    for (std::size_t p = 0; p < g.point_count(); ++p)
        for (int t = 0; t < g.trials_per_point; ++t) units.push_back({p, static_cast<std::size_t>(t)});
    return units;
}

void BM_SweepSerial(benchmark::State& state) {
    const ParamGrid g = bench_grid();
    const auto units = all_units(g);
    for (auto _ : state) benchmark::DoNotOptimize(run_units_serial(g, units));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(units.size()));
}

void BM_SweepParallel(benchmark::State& state) {
    const ParamGrid g = bench_grid();
    const auto units = all_units(g);
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_units_parallel(g, units, workers));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(units.size()));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_SweepParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
