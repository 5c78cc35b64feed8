#include "merodyn/hyperbolicity.hpp"
#include "merodyn/render.hpp"
#include "merodyn/transfer.hpp"

#include <benchmark/benchmark.h>

using namespace merodyn;

namespace {

MapSpec quadratic() { return MapSpec::polynomial({0.1, 0.0, 1.0}); }

void tree(benchmark::State& state, bool parallel) {
    const auto map = MapSpec::tangent(0.5);
    const auto a = repelling_fixed_point(map);
    TreeOptions opts;
    opts.depth = static_cast<int>(state.range(0));
    opts.parallel = parallel;
    for (auto _ : state) {
        auto t = parallel ? build_tree(map, a, opts) : build_tree_serial(map, a, opts);
        benchmark::DoNotOptimize(t.levels.back().size());
    }
}

void BM_TreeSerial(benchmark::State& state) { tree(state, false); }
void BM_TreeOpenMP(benchmark::State& state) { tree(state, true); }

void BM_RenderSerial(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(render_julia_serial(quadratic(), {}, n, n).occupied_count());
}

void BM_RenderOpenMP(benchmark::State& state) {
    const auto n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(render_julia(quadratic(), {}, n, n).occupied_count());
}

void BM_EigenSerial(benchmark::State& state) {
    const auto map = MapSpec::tangent(0.5);
    const auto sample = julia_sample(map, static_cast<int>(state.range(0)), 30, 1);
    for (auto _ : state) benchmark::DoNotOptimize(transfer_eigen_serial(map, sample, 0.750137852, 60).eigenvalue_log);
}

void BM_EigenOpenMP(benchmark::State& state) {
    const auto map = MapSpec::tangent(0.5);
    const auto sample = julia_sample(map, static_cast<int>(state.range(0)), 30, 1);
    for (auto _ : state) benchmark::DoNotOptimize(transfer_eigen(map, sample, 0.750137852, 60).eigenvalue_log);
}

}  // namespace

BENCHMARK(BM_TreeSerial)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TreeOpenMP)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderSerial)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderOpenMP)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EigenSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EigenOpenMP)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
