#include <benchmark/benchmark.h>

#include "msk/config.hpp"
#include "msk/mcmc.hpp"
#include "msk/oracle.hpp"
#include "msk/order_params.hpp"
#include "msk/tap.hpp"

using namespace msk;

static void BM_GlauberSweep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ModelSpec spec = preset_model("bipartite", 0.25, 0.3, n);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);
    SpinConfig sigma;
    sigma.spins.assign(n, int8_t{1});
    SplitRng rng(2, 0);
    for (auto _ : state) glauber_sweep(spec, dis, sigma, rng);
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_GlauberSweep)->Arg(64)->Arg(256)->Arg(1024);

static void BM_McmcEstimate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ModelSpec spec = preset_model("bipartite", 0.25, 0.3, n);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);
    ChainConfig cfg;
    cfg.n_sweeps = 200;
    cfg.burn_in_sweeps = 50;
    cfg.seed = 9;
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate(spec, layout, dis, cfg));
}
BENCHMARK(BM_McmcEstimate)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_ExactEnumeration(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ModelSpec spec = preset_model("bipartite", 0.25, 0.3, n);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(enumerate_gibbs(spec, layout, dis));
    state.SetItemsProcessed(state.iterations() * (int64_t{1} << n));
}
BENCHMARK(BM_ExactEnumeration)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

static void BM_OverlapExpectation(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ModelSpec spec = preset_model("bipartite", 0.25, 0.3, n);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);
    const GibbsTable table = enumerate_gibbs(spec, layout, dis);
    for (auto _ : state)
        benchmark::DoNotOptimize(overlap_expectation(
            table, layout, [](const std::vector<double>& r) { return r[0] * r[0]; }));
}
BENCHMARK(BM_OverlapExpectation)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_SolveQ(benchmark::State& state) {
    const ModelSpec spec = preset_model("convex", 0.3, 0.3, 8);
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    for (auto _ : state) benchmark::DoNotOptimize(solve_q(spec, rule));
}
BENCHMARK(BM_SolveQ);

static void BM_TapIterate(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ModelSpec spec = preset_model("bipartite", 0.25, 0.3, n);
    const SpeciesLayout layout = build_layout(spec);
    const DisorderSample dis = sample_disorder(spec, layout, 1);
    const QuadratureRule rule = QuadratureRule::gauss_hermite();
    const std::vector<double> q = solve_q(spec, rule).q;
    for (auto _ : state)
        benchmark::DoNotOptimize(tap_iterate(spec, layout, dis, q));
}
BENCHMARK(BM_TapIterate)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
