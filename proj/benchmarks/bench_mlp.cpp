#include <benchmark/benchmark.h>

#include "uq/loss.hpp"
#include "uq/mlp.hpp"
#include "uq/rng.hpp"

namespace {

uq::MlpModel toy_model(uq::RngStream& rng) {
    return uq::make_mlp({2, 64, 64, 5}, 0.1, 5, rng);
}

void BM_ForwardDeterministic(benchmark::State& state) {
    uq::RngStream rng(1);
    const uq::MlpModel model = toy_model(rng);
    const std::vector<double> x = {0.3, -1.2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::forward(model, x, nullptr));
    }
}
BENCHMARK(BM_ForwardDeterministic);

void BM_ForwardStochastic(benchmark::State& state) {
    uq::RngStream rng(2);
    const uq::MlpModel model = toy_model(rng);
    const std::vector<double> x = {0.3, -1.2};
    uq::RngStream pass(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::forward(model, x, &pass));
    }
}
BENCHMARK(BM_ForwardStochastic);

void BM_ForwardBackward(benchmark::State& state) {
    uq::RngStream rng(4);
    const uq::MlpModel model = toy_model(rng);
    const std::vector<double> x = {0.3, -1.2};
    uq::Gradients grads = uq::zero_gradients(model);
    for (auto _ : state) {
        const uq::ForwardTrace trace = uq::forward(model, x, nullptr);
        const uq::LossValue loss = uq::cross_entropy_loss(trace.logits(), 2);
        uq::backward(model, trace, loss.dlogits, grads);
        benchmark::DoNotOptimize(grads);
    }
}
BENCHMARK(BM_ForwardBackward);

void BM_LogitNormLoss(benchmark::State& state) {
    uq::RngStream rng(5);
    std::vector<double> logits(10);
    for (double& v : logits) v = 4.0 * rng.next_double() - 2.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::logit_norm_loss(logits, 3, 0.04));
    }
}
BENCHMARK(BM_LogitNormLoss);

}  // namespace
