#include <benchmark/benchmark.h>

#include "uq/mcdropout.hpp"
#include "uq/rng.hpp"

namespace {

void BM_McInfer(benchmark::State& state) {
    uq::RngStream rng(1);
    const uq::MlpModel model = uq::make_mlp({2, 64, 64, 5}, 0.1, 5, rng);
    const std::vector<double> x = {1.5, -0.5};
    const uq::RngStream stream(2);
    const auto passes = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::mc_infer(model, x, passes, stream));
    }
}
BENCHMARK(BM_McInfer)->Arg(1)->Arg(10);

void BM_Summarize(benchmark::State& state) {
    uq::RngStream rng(3);
    const uq::MlpModel model = uq::make_mlp({2, 64, 64, 5}, 0.1, 5, rng);
    const std::vector<double> x = {1.5, -0.5};
    const uq::McSamples samples = uq::mc_infer(model, x, 10, uq::RngStream(4));
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::summarize(samples));
    }
}
BENCHMARK(BM_Summarize);

}  // namespace
