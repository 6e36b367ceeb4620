#include "fairimpute/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fairimpute/errors.hpp"
#include "fairimpute/simd.hpp"

namespace fairimpute {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw PreconditionError("Matrix: expected " + std::to_string(rows_ * cols_) +
                            " values, got " + std::to_string(values_.size()));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw NumericError("Matrix: non-finite entry");
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t d = n == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(n * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw PreconditionError("Matrix::from_rows: ragged rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Matrix(n, d, std::move(values));
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = values_[i * cols_ + j];
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) throw PreconditionError("Matrix::set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) values_[i * cols_ + j] = values[i];
}

Matrix Matrix::select_rows(std::span<const std::size_t> indices) const {
  Matrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = row(indices[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

namespace {

// In-place lower Cholesky factor; false if a pivot is not positive.
bool cholesky_factor(std::vector<double>& l, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = l[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= l[j * n + k] * l[j * n + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double root = std::sqrt(diag);
    l[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = l[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = v / root;
    }
  }
  return true;
}

}  // namespace

std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) {
    throw PreconditionError("cholesky_solve: dimension mismatch");
  }
  for (double v : a.values()) {
    if (!std::isfinite(v)) throw NumericError("cholesky_solve: non-finite matrix entry");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw NumericError("cholesky_solve: non-finite right-hand side");
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += a(i, i);
  const double base_jitter = trace > 0.0 ? 1e-10 * trace / static_cast<double>(n) : 1e-10;

  std::vector<double> l(a.values().begin(), a.values().end());
  double jitter = 0.0;
  bool ok = cholesky_factor(l, n);
  for (int escalation = 0; !ok && escalation < 3; ++escalation) {
    jitter = escalation == 0 ? base_jitter : jitter * 100.0;
    l.assign(a.values().begin(), a.values().end());
    for (std::size_t i = 0; i < n; ++i) l[i * n + i] += jitter;
    ok = cholesky_factor(l, n);
  }
  if (!ok) throw NumericError("cholesky_solve: matrix is singular even after jitter");

  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= l[i * n + k] * x[k];
    x[i] = v / l[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= l[k * n + ii] * x[k];
    x[ii] = v / l[ii * n + ii];
  }
  return x;
}

OlsFit ols_solve_columns(std::span<const std::span<const double>> columns,
                         std::span<const double> target, double ridge) {
  const std::size_t p = columns.size();
  const std::size_t n = target.size();
  if (p == 0) throw PreconditionError("ols_solve: empty design");
  if (ridge < 0.0 || !std::isfinite(ridge)) throw PreconditionError("ols_solve: ridge must be >= 0");
  for (const auto& c : columns) {
    if (c.size() != n) throw PreconditionError("ols_solve: column length mismatch");
  }
  if (n < p && ridge == 0.0) {
    throw PreconditionError("ols_solve: fewer rows than columns without ridge");
  }
  for (double v : target) {
    if (!std::isfinite(v)) throw NumericError("ols_solve: non-finite target");
  }

  Matrix gram(p, p);
  std::vector<double> rhs(p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = 0; k <= j; ++k) {
      const double g = simd::dot(columns[j], columns[k]);
      gram(j, k) = g;
      gram(k, j) = g;
    }
    gram(j, j) += ridge;
    rhs[j] = simd::dot(columns[j], target);
  }

  OlsFit fit;
  fit.coefficients = cholesky_solve(gram, rhs);

  std::vector<double> fitted(n, 0.0);
  for (std::size_t j = 0; j < p; ++j) simd::axpy(fit.coefficients[j], columns[j], fitted);
  const double rss = simd::sum_sq_diff(target, fitted);
  fit.residual_std = n > p ? std::sqrt(rss / static_cast<double>(n - p)) : 0.0;
  return fit;
}

OlsFit ols_solve_gram(Matrix gram, std::span<const double> xty, double yty, std::size_t n,
                      double ridge) {
  const std::size_t p = gram.rows();
  if (p == 0 || gram.cols() != p || xty.size() != p) {
    throw PreconditionError("ols_solve_gram: dimension mismatch");
  }
  if (ridge < 0.0 || !std::isfinite(ridge)) throw PreconditionError("ols_solve: ridge must be >= 0");
  if (n < p && ridge == 0.0) {
    throw PreconditionError("ols_solve: fewer rows than columns without ridge");
  }
  if (!std::isfinite(yty)) throw NumericError("ols_solve: non-finite target");
  for (std::size_t j = 0; j < p; ++j) gram(j, j) += ridge;
  OlsFit fit;
  fit.coefficients = cholesky_solve(gram, xty);
  double explained = 0.0;
  for (std::size_t j = 0; j < p; ++j) explained += fit.coefficients[j] * xty[j];
  // (X'X + ridge I) w = X'y gives RSS = y'y - w'X'y - ridge |w|^2.
  double rss = yty - explained;
  for (double w : fit.coefficients) rss -= ridge * w * w;
  fit.residual_std = n > p ? std::sqrt(std::max(0.0, rss) / static_cast<double>(n - p)) : 0.0;
  return fit;
}

OlsFit ols_solve(const Matrix& design, std::span<const double> target, double ridge) {
  if (design.rows() != target.size()) throw PreconditionError("ols_solve: row count mismatch");
  std::vector<std::vector<double>> cols(design.cols());
  std::vector<std::span<const double>> views;
  for (std::size_t j = 0; j < design.cols(); ++j) {
    cols[j] = design.column(j);
    views.emplace_back(cols[j]);
  }
  return ols_solve_columns(views, target, ridge);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_cdf_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw PreconditionError("normal_cdf_inv: p must lie in (0, 1), got " + std::to_string(p));
  }
  // Acklam's rational approximation (relative error ~1e-9) followed by one
  // Halley step against the erfc-based CDF.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  constexpr double p_high = 1.0 - p_low;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= p_high) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

}  // namespace fairimpute
