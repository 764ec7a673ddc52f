// Serial reference loops vs the OpenMP backend on the path-parallel kernels.
// Arg 0 selects the backend (0 serial, 1 openmp), arg 1 the path count.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rbsdej/backward.hpp"
#include "rbsdej/regression.hpp"
#include "rbsdej/registry.hpp"
#include "rbsdej/simulate.hpp"

using namespace rbsdej;

namespace {

Exec backend(const benchmark::State& state) {
    return state.range(0) == 0 ? Exec::serial() : Exec::parallel();
}

ProblemSpec bermudan() {
    return make_problem("bermudan_put_jumps", {}, {1.5, default_beta(1.5), 1.0}, 1.0);
}

void BM_SamplePaths(benchmark::State& state) {
    const ProblemSpec spec = bermudan();
    const TimeGrid grid = build_grid(1.0, 50);
    const Exec exec = backend(state);
    const auto paths = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(sample_paths(spec, grid, paths, 1, exec));
    state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_NormalEquations(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(1));
    std::mt19937_64 gen(3);
    std::normal_distribution<double> draw;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = draw(gen);
        y[i] = x[i] * x[i] + draw(gen);
    }
    const Exec exec = backend(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_normal_equations(exec, x, y, 0.0, 4.0, 4));
    }
    state.SetItemsProcessed(state.iterations() * state.range(1));
}

void BM_SolvePenalized(benchmark::State& state) {
    const ProblemSpec spec = bermudan();
    const auto paths = static_cast<std::size_t>(state.range(1));
    const PathBundle bundle = sample_paths(spec, build_grid(1.0, 50), paths, 1);
    PenalizedOptions opt;
    opt.exec = backend(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_penalized(spec, bundle, {3, true}, 1024.0, opt));
    }
    state.SetItemsProcessed(state.iterations() * state.range(1));
}

}  // namespace

BENCHMARK(BM_SamplePaths)->ArgsProduct({{0, 1}, {10000, 100000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NormalEquations)->ArgsProduct({{0, 1}, {100000, 1000000}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolvePenalized)->ArgsProduct({{0, 1}, {10000, 50000}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
