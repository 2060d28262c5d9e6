#include <benchmark/benchmark.h>

#include "setmem/builtins.hpp"
#include "setmem/config.hpp"
#include "setmem/dynamics.hpp"
#include "setmem/estimators.hpp"
#include "setmem/experiments.hpp"

namespace {

using namespace setmem;

Execution execution_of(const benchmark::State& state) {
    return state.range(0) ? Execution::Parallel : Execution::Serial;
}

// Row QPs of one estimate on a d-dimensional stable system.
void BM_EstimateRows(benchmark::State& state) {
    const Eigen::Index d = state.range(1);
    const Matrix a = 0.9 * Matrix::Identity(d, d) + 0.05 * Matrix::Ones(d, d) / static_cast<double>(d);
    NoiseSampler sampler(NoiseSet::cube(d), 11);
    const Trajectory traj = simulate(SwitchedSystem({a}), std::vector<std::size_t>(400, 0), Vector::Zero(d), sampler);
    const MeasurementGroup g = group(traj, 1).front();
    EstimateOptions opts;
    opts.execution = execution_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(sme_estimate(g, NoiseSet::cube(d), opts));
}
BENCHMARK(BM_EstimateRows)->ArgsProduct({{0, 1}, {4, 16}})->ArgNames({"parallel", "d"})->Unit(benchmark::kMillisecond);

void BM_CompareOlsSeeds(benchmark::State& state) {
    const ExperimentConfig c = parse_config(R"({"schema_version": 1, "experiment": "compare-ols",
        "horizon": 200, "seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15]})");
    for (auto _ : state) benchmark::DoNotOptimize(run_compare_ols(c, {execution_of(state), false}));
}
BENCHMARK(BM_CompareOlsSeeds)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_BanditSeeds(benchmark::State& state) {
    const ExperimentConfig c = parse_config(R"({"schema_version": 1, "experiment": "bandit",
        "horizon": 150, "seeds": [0, 1, 2, 3, 4, 5, 6, 7]})");
    for (auto _ : state) benchmark::DoNotOptimize(run_bandit(c, {execution_of(state), false}));
}
BENCHMARK(BM_BanditSeeds)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
