#include <benchmark/benchmark.h>

#include <cmath>

#include "loglab/fractal.hpp"
#include "loglab/geometry.hpp"
#include "loglab/grid_field.hpp"
#include "loglab/metric.hpp"
#include "loglab/paths.hpp"
#include "loglab/random.hpp"
#include "loglab/whitenoise.hpp"

using namespace loglab;

static void BM_Philox(benchmark::State& state) {
    Stream rng(1);
    for (auto _ : state) benchmark::DoNotOptimize(rng());
}
BENCHMARK(BM_Philox);

static void BM_IntersectionRatio(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    double u = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(geometry::intersection_ratio(u, 1.0, d));
        u = u < 1.9 ? u + 0.01 : 0.1;
    }
}
BENCHMARK(BM_IntersectionRatio)->Arg(2)->Arg(110)->Arg(1000);

static void BM_CovHn(benchmark::State& state) {
    const auto spec = whitenoise::CovarianceSpec::level(static_cast<int>(state.range(0)), 12);
    double u = 0.001;
    for (auto _ : state) {
        benchmark::DoNotOptimize(whitenoise::cov_hn(u, spec));
        u = u < 1.5 ? u * 1.1 : 0.001;
    }
}
BENCHMARK(BM_CovHn)->Arg(2)->Arg(110);

static void BM_CovarianceTableLookup(benchmark::State& state) {
    const whitenoise::CovarianceTable table(whitenoise::CovarianceSpec::level(2, 10));
    double u = 0.001;
    for (auto _ : state) {
        benchmark::DoNotOptimize(table(u));
        u = u < 1.5 ? u * 1.1 : 0.001;
    }
}
BENCHMARK(BM_CovarianceTableLookup);

static void BM_RefinedChain(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(paths::sample_refined_chain(110, 10, n, PathFamily::P, ++seed));
}
BENCHMARK(BM_RefinedChain)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

static void BM_GridField(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const whitenoise::GridFieldSampler sampler(whitenoise::CovarianceSpec::level(2, n), 1.0, std::ldexp(1.0, -n));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(sampler.sample(++seed));
}
BENCHMARK(BM_GridField)->Arg(5)->Arg(7)->Unit(benchmark::kMillisecond);

static void BM_Dijkstra(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const whitenoise::GridFieldSampler sampler(whitenoise::CovarianceSpec::level(2, n), 1.0, std::ldexp(1.0, -n));
    const metric::WeightedGrid grid(sampler.sample(1), 0.4);
    for (auto _ : state) benchmark::DoNotOptimize(metric::lfpp_distance(grid, 0, grid.size() - 1));
}
BENCHMARK(BM_Dijkstra)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_FractalCrossing(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        const auto tree = fractal::sample_retained(d, 0.5, 3, 1, ++seed);
        benchmark::DoNotOptimize(fractal::has_crossing(tree, 0, fractal::Connectivity::closed));
    }
}
BENCHMARK(BM_FractalCrossing)->Arg(2)->Arg(3)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
