#include "uq/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uq/error.hpp"

namespace uq {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionMismatch("matrix: data length " + std::to_string(data_.size()) +
                                " does not match " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw DimensionMismatch("matrix: ragged initializer rows");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.cols()) {
        throw DimensionMismatch("matvec: vector length " + std::to_string(x.size()) +
                                " vs matrix cols " + std::to_string(m.cols()));
    }
    std::vector<double> y(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        y[i] = dot(m.row(i), x);
    }
    return y;
}

std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> x) {
    if (x.size() != m.rows()) {
        throw DimensionMismatch("matvec_transposed: vector length " + std::to_string(x.size()) +
                                " vs matrix rows " + std::to_string(m.rows()));
    }
    std::vector<double> y(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto row = m.row(i);
        const double xi = x[i];
        for (std::size_t j = 0; j < m.cols(); ++j) y[j] += row[j] * xi;
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionMismatch("dot: lengths " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

Matrix cholesky(const Matrix& cov) {
    if (cov.rows() != cov.cols()) {
        throw DimensionMismatch("cholesky: matrix is " + std::to_string(cov.rows()) + "x" +
                                std::to_string(cov.cols()));
    }
    const std::size_t n = cov.rows();
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = cov(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) {
                    throw NotPositiveDefinite("cholesky: pivot " + std::to_string(s) +
                                              " at index " + std::to_string(i));
                }
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

double logsumexp(std::span<const double> v) {
    if (v.empty()) {
        throw DimensionMismatch("logsumexp: empty vector");
    }
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace uq
