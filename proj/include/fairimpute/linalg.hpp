#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fairimpute {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of row-major `values`; throws if the size is wrong or an
  /// entry is not finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return values_.empty(); }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

  std::vector<double> column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> values);

  std::span<const double> values() const { return values_; }

  /// New matrix holding the given rows, in order.
  Matrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Solves A x = b for symmetric positive (semi-)definite A by Cholesky. On
/// factorisation failure, 1e-10 * trace(A) / n is added to the diagonal and
/// the jitter is escalated by 100x, at most three times.
std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b);

struct OlsFit {
  std::vector<double> coefficients;
  /// sqrt(RSS / (n - p)); zero when n <= p.
  double residual_std = 0.0;
};

/// Minimises |y - X w|^2 + ridge |w|^2 via the normal equations. `columns`
/// holds the design column-major (one span per regressor, all of equal length).
OlsFit ols_solve_columns(std::span<const std::span<const double>> columns,
                         std::span<const double> target, double ridge);

/// Same solve from precomputed sufficient statistics: gram = X'X, xty = X'y,
/// yty = y'y over n rows. RSS is taken as yty - w'X'y, floored at zero.
OlsFit ols_solve_gram(Matrix gram, std::span<const double> xty, double yty, std::size_t n,
                      double ridge);

/// Row-major convenience wrapper around ols_solve_columns.
OlsFit ols_solve(const Matrix& design, std::span<const double> target, double ridge);

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse standard normal CDF; p must lie in (0, 1).
double normal_cdf_inv(double p);

}  // namespace fairimpute
