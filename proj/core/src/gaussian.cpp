#include "uq/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "uq/error.hpp"

namespace uq {

namespace {

// Solves L y = r in place for lower-triangular L.
void forward_solve(const Matrix& l, std::vector<double>& r) {
    const std::size_t n = l.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double s = r[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * r[k];
        r[i] = s / l(i, i);
    }
}

}  // namespace

GaussianParams make_gaussian(std::vector<double> mean, const Matrix& cov) {
    const std::size_t d = mean.size();
    if (cov.rows() != d || cov.cols() != d) {
        throw DimensionMismatch("make_gaussian: mean dim " + std::to_string(d) +
                                " vs covariance " + std::to_string(cov.rows()) + "x" +
                                std::to_string(cov.cols()));
    }
    Matrix reg = cov;
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += cov(i, i);
    const double lambda = std::max(1e-4 * trace / static_cast<double>(d), 1e-12);
    for (std::size_t i = 0; i < d; ++i) reg(i, i) += lambda;

    GaussianParams g;
    g.mean = std::move(mean);
    g.chol = cholesky(reg);
    g.covariance = std::move(reg);
    return g;
}

double gaussian_logpdf(std::span<const double> x, const GaussianParams& g) {
    const std::size_t d = g.dim();
    if (x.size() != d) {
        throw DimensionMismatch("gaussian_logpdf: x dim " + std::to_string(x.size()) +
                                " vs gaussian dim " + std::to_string(d));
    }
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = x[i] - g.mean[i];
    forward_solve(g.chol, r);

    double log_det_half = 0.0;
    for (std::size_t i = 0; i < d; ++i) log_det_half += std::log(g.chol(i, i));
    double quad = 0.0;
    for (double v : r) quad += v * v;

    return -0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - log_det_half -
           0.5 * quad;
}

double mahalanobis_sq(std::span<const double> x, const GaussianParams& g) {
    const std::size_t d = g.dim();
    if (x.size() != d) {
        throw DimensionMismatch("mahalanobis_sq: x dim " + std::to_string(x.size()) +
                                " vs gaussian dim " + std::to_string(d));
    }
    std::vector<double> r(d);
    for (std::size_t i = 0; i < d; ++i) r[i] = x[i] - g.mean[i];
    forward_solve(g.chol, r);
    double quad = 0.0;
    for (double v : r) quad += v * v;
    return quad;
}

Matrix sample_gaussian(const GaussianParams& g, std::size_t n, RngStream& rng) {
    const std::size_t d = g.dim();
    Matrix out(n, d);
    std::vector<double> z(d);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < d; ++i) z[i] = rng.next_normal();
        auto row = out.row(r);
        for (std::size_t i = 0; i < d; ++i) {
            double s = g.mean[i];
            for (std::size_t k = 0; k <= i; ++k) s += g.chol(i, k) * z[k];
            row[i] = s;
        }
    }
    return out;
}

}  // namespace uq
