#include <benchmark/benchmark.h>

#include <random>

#include "rrqss/keyrate.hpp"
#include "rrqss/optimizer.hpp"
#include "rrqss/protocol_sim.hpp"
#include "rrqss/security_checks.hpp"

namespace {

using namespace rrqss;

void BM_rate_inside(benchmark::State& state) {
    const SystemParams sys = default_system();
    const Geometry geom{300};
    const ProtocolParams proto{15, 512, 32};
    for (auto _ : state) {
        benchmark::DoNotOptimize(keyrate_inside(sys, proto, geom));
    }
}
BENCHMARK(BM_rate_inside);

void BM_rate_inside_finite(benchmark::State& state) {
    const SystemParams sys = default_system();
    const Geometry geom{300};
    const ProtocolParams proto{15, 512, 32};
    const FiniteSizeParams fin{1000000, 100};
    for (auto _ : state) {
        benchmark::DoNotOptimize(keyrate_inside_finite(sys, proto, geom, fin));
    }
}
BENCHMARK(BM_rate_inside_finite);

void BM_binomial_inversion(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(invert_binomial_tail(1000000, 0.02, 100));
    }
}
BENCHMARK(BM_binomial_inversion);

void BM_optimize_distance(benchmark::State& state) {
    const SystemParams sys = default_system();
    const Geometry geom{static_cast<double>(state.range(0))};
    const SearchSpace space = SearchSpace::defaults();
    for (auto _ : state) {
        benchmark::DoNotOptimize(optimize(sys, geom, space, Objective::inside));
    }
}
BENCHMARK(BM_optimize_distance)->Arg(100)->Arg(300)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_simulate_trains(benchmark::State& state) {
    TrainConfig cfg;
    cfg.sys = default_system();
    cfg.proto = ProtocolParams{0.5, 64, 10};
    cfg.geom = Geometry{100};
    cfg.trains = 1;
    cfg.seed = 7;
    std::mt19937_64 rng(cfg.seed);
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_train(cfg, rng));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_simulate_trains);

void BM_equivalence(benchmark::State& state) {
    const int L = static_cast<int>(state.range(0));
    std::uint64_t seed = 11;
    for (auto _ : state) {
        benchmark::DoNotOptimize(equivalence_report(L, 1, seed++));
    }
    state.SetComplexityN(L);
}
BENCHMARK(BM_equivalence)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
