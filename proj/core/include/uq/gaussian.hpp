#pragma once

#include <span>
#include <vector>

#include "uq/matrix.hpp"
#include "uq/rng.hpp"

namespace uq {

// Multivariate Gaussian with a precomputed Cholesky factor. `covariance`
// stores the matrix that was actually factorized, i.e. after ridge
// regularization, so chol * chol^T reproduces it to rounding.
struct GaussianParams {
    std::vector<double> mean;
    Matrix covariance;
    Matrix chol;  // lower triangular

    std::size_t dim() const { return mean.size(); }
};

// Builds GaussianParams from a mean and a symmetric covariance estimate.
// A ridge lambda*I with lambda = 1e-4 * trace(cov)/d (floored at 1e-12 so a
// zero matrix still factors) is added before the Cholesky factorization.
GaussianParams make_gaussian(std::vector<double> mean, const Matrix& cov);

// log N(x; mu, Sigma) via the stored factor.
double gaussian_logpdf(std::span<const double> x, const GaussianParams& g);

// n i.i.d. draws, one per row. Deterministic given the stream state.
Matrix sample_gaussian(const GaussianParams& g, std::size_t n, RngStream& rng);

// Squared Mahalanobis distance (x - mu)^T Sigma^-1 (x - mu).
double mahalanobis_sq(std::span<const double> x, const GaussianParams& g);

}  // namespace uq
