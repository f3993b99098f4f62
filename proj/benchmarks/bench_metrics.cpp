#include <benchmark/benchmark.h>

#include "uq/metrics.hpp"
#include "uq/rng.hpp"

namespace {

uq::ScoredPopulations random_populations(std::size_t n, std::uint64_t seed) {
    uq::RngStream rng(seed);
    uq::ScoredPopulations p;
    p.id_scores.resize(n);
    p.ood_scores.resize(n);
    for (double& v : p.id_scores) v = rng.next_normal() + 1.0;
    for (double& v : p.ood_scores) v = rng.next_normal();
    return p;
}

void BM_Auroc(benchmark::State& state) {
    const auto p = random_populations(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::auroc(p));
    }
}
BENCHMARK(BM_Auroc)->Arg(1000)->Arg(100000);

void BM_Aupr(benchmark::State& state) {
    const auto p = random_populations(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::aupr(p, uq::Positive::id));
    }
}
BENCHMARK(BM_Aupr)->Arg(1000)->Arg(100000);

void BM_FprAtTpr(benchmark::State& state) {
    const auto p = random_populations(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::fpr_at_tpr(p, uq::Positive::id));
    }
}
BENCHMARK(BM_FprAtTpr)->Arg(1000)->Arg(100000);

}  // namespace
