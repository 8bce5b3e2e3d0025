#include <benchmark/benchmark.h>

#include "gsnell/envelope.hpp"
#include "gsnell/penalize.hpp"
#include "gsnell/random_instances.hpp"
#include "gsnell/snell.hpp"

namespace {

using namespace gsnell;

void BM_SnellEnvelope(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    InstanceRng rng(7);
    const TreeModel model(TimeGrid(depth, 1.0));
    const AdaptedProcess payoff = random_process(rng, depth, -1.0, 1.0);
    for (auto _ : state) {
        auto s = snell_envelope(payoff, model);
        benchmark::DoNotOptimize(s);
    }
    state.SetComplexityN(depth);
}
BENCHMARK(BM_SnellEnvelope)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_PenalizedSolve(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    InstanceRng rng(11);
    const TreeModel model(TimeGrid(depth, 1.0));
    const LowerData data = random_lower_data(rng, model);
    const AdaptedProcess v = default_dominating_martingale(data, model);
    for (auto _ : state) {
        auto solution = solve_penalized(1024.0, data, v, model);
        benchmark::DoNotOptimize(solution);
    }
    state.SetComplexityN(depth);
}
BENCHMARK(BM_PenalizedSolve)->RangeMultiplier(4)->Range(16, 256)->Complexity();

void BM_IterateToLimit(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    InstanceRng rng(13);
    const TreeModel model(TimeGrid(depth, 1.0));
    const LowerData data = random_lower_data(rng, model);
    for (auto _ : state) {
        auto solution = iterate_to_limit(data, model);
        benchmark::DoNotOptimize(solution);
    }
}
BENCHMARK(BM_IterateToLimit)->Arg(8)->Arg(16)->Arg(32);

void BM_GeneralizedSnellWithCertificates(benchmark::State& state) {
    InstanceRng rng(17);
    const TreeModel model(TimeGrid(8, 1.0));
    const LowerData data = random_lower_data(rng, model);
    for (auto _ : state) {
        auto result = generalized_snell(data, model);
        benchmark::DoNotOptimize(result);
    }
}
BENCHMARK(BM_GeneralizedSnellWithCertificates);

}  // namespace

BENCHMARK_MAIN();
