#include <benchmark/benchmark.h>

#include "uq/gaussian.hpp"
#include "uq/matrix.hpp"
#include "uq/rng.hpp"

namespace {

uq::Matrix random_spd(std::size_t d, uq::RngStream& rng) {
    uq::Matrix b(d, d);
    for (double& v : b.data()) v = 2.0 * rng.next_double() - 1.0;
    uq::Matrix a(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += b(i, k) * b(j, k);
            a(i, j) = s;
        }
        a(i, i) += static_cast<double>(d);
    }
    return a;
}

void BM_Cholesky(benchmark::State& state) {
    uq::RngStream rng(1);
    const uq::Matrix a = random_spd(static_cast<std::size_t>(state.range(0)), rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::cholesky(a));
    }
}
BENCHMARK(BM_Cholesky)->Arg(8)->Arg(64);

void BM_GaussianLogpdf(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    uq::RngStream rng(2);
    const uq::GaussianParams g = uq::make_gaussian(std::vector<double>(d, 0.0), random_spd(d, rng));
    std::vector<double> x(d);
    for (double& v : x) v = rng.next_normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::gaussian_logpdf(x, g));
    }
}
BENCHMARK(BM_GaussianLogpdf)->Arg(8)->Arg(64);

void BM_SampleGaussian(benchmark::State& state) {
    const auto d = static_cast<std::size_t>(state.range(0));
    uq::RngStream rng(3);
    const uq::GaussianParams g = uq::make_gaussian(std::vector<double>(d, 0.0), random_spd(d, rng));
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::sample_gaussian(g, 100, rng));
    }
}
BENCHMARK(BM_SampleGaussian)->Arg(8)->Arg(64);

void BM_LogSumExp(benchmark::State& state) {
    uq::RngStream rng(4);
    std::vector<double> v(static_cast<std::size_t>(state.range(0)));
    for (double& x : v) x = 20.0 * rng.next_double() - 10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(uq::logsumexp(v));
    }
}
BENCHMARK(BM_LogSumExp)->Arg(10)->Arg(1000);

}  // namespace
