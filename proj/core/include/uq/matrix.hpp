#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace uq {

// Dense row-major matrix of doubles. Just enough linear algebra for the
// classifiers and Gaussians in this project; not a BLAS.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// y = M x
std::vector<double> matvec(const Matrix& m, std::span<const double> x);
// y = M^T x
std::vector<double> matvec_transposed(const Matrix& m, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double frobenius_norm(const Matrix& m);

// Lower-triangular factor L with L L^T = cov. The input must already carry
// any regularization; a pivot <= 0 raises NotPositiveDefinite.
Matrix cholesky(const Matrix& cov);

// log sum_i exp(v_i), max-subtracted.
double logsumexp(std::span<const double> v);

}  // namespace uq
