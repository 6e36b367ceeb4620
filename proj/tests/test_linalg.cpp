#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fairimpute/errors.hpp"
#include "fairimpute/linalg.hpp"
#include "fairimpute/rng.hpp"

using namespace fairimpute;

namespace {

// Gauss-Jordan inverse with partial pivoting, long double.
std::vector<std::vector<long double>> invert(std::vector<std::vector<long double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<long double>> inv(n, std::vector<long double>(n, 0.0L));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const long double d = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= d;
      inv[c][j] /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const long double f = a[r][c];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

// Standard normal CDF in long double: power series for |x| <= 3, Laplace
// continued fraction for the tail beyond.
long double oracle_cdf(long double x) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double ax = std::fabs(x);
  const long double pdf = std::exp(-0.5L * ax * ax) / std::sqrt(2.0L * pi);
  long double upper;
  if (ax <= 3.0L) {
    long double term = ax;
    long double s = ax;
    for (int k = 1; k < 200; ++k) {
      term *= ax * ax / (2.0L * k + 1.0L);
      s += term;
      if (term < 1e-30L * s) break;
    }
    upper = 0.5L - pdf * s;
  } else {
    long double frac = ax;
    for (int k = 300; k >= 1; --k) frac = ax + k / frac;
    upper = pdf / frac;
  }
  return x >= 0 ? 1.0L - upper : upper;
}

long double oracle_inv(long double p) {
  long double lo = -40.0L;
  long double hi = 40.0L;
  for (int it = 0; it < 200; ++it) {
    const long double mid = 0.5L * (lo + hi);
    if (oracle_cdf(mid) < p) lo = mid; else hi = mid;
  }
  return 0.5L * (lo + hi);
}

}  // namespace

TEST_CASE("matrix construction validates input") {
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), PreconditionError);
  CHECK_THROWS_AS(Matrix(1, 1, std::vector<double>{std::nan("")}), NumericError);
  CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), PreconditionError);
  const Matrix m = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  CHECK(m.column(1) == std::vector<double>{2, 4, 6});
  const std::vector<std::size_t> idx{2, 0};
  CHECK(m.select_rows(idx) == Matrix::from_rows({{5, 6}, {1, 2}}));
}

TEST_CASE("ols with an identity design returns the target") {
  Matrix eye(4, 4);
  for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
  const std::vector<double> y{1.5, -2, 0.25, 7};
  const auto fit = ols_solve(eye, y, 0.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(fit.coefficients[i] == doctest::Approx(y[i]).epsilon(1e-14));
}

TEST_CASE("exactly linear target has zero residual spread") {
  Rng rng(5);
  Matrix x(40, 3);
  std::vector<double> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    x(i, 2) = rng.uniform();
    y[i] = 0.5 - 2.0 * x(i, 1) + 3.0 * x(i, 2);
  }
  const auto fit = ols_solve(x, y, 0.0);
  CHECK(fit.residual_std < 1e-10);
  CHECK(fit.coefficients[1] == doctest::Approx(-2.0).epsilon(1e-10));
}

TEST_CASE("ols matches an explicit-inverse normal-equation solve") {
  Rng rng(2024);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix x(50, 3);
    std::vector<double> y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      for (std::size_t j = 0; j < 3; ++j) x(i, j) = rng.normal();
      y[i] = rng.normal();
    }
    for (double ridge : {0.0, 0.7}) {
      std::vector<std::vector<long double>> xtx(3, std::vector<long double>(3, 0.0L));
      std::vector<long double> xty(3, 0.0L);
      for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t a = 0; a < 3; ++a) {
          xty[a] += static_cast<long double>(x(i, a)) * y[i];
          for (std::size_t b = 0; b < 3; ++b) xtx[a][b] += static_cast<long double>(x(i, a)) * x(i, b);
        }
      }
      for (std::size_t a = 0; a < 3; ++a) xtx[a][a] += ridge;
      const auto inv = invert(xtx);
      const auto fit = ols_solve(x, y, ridge);
      for (std::size_t a = 0; a < 3; ++a) {
        long double w = 0;
        for (std::size_t b = 0; b < 3; ++b) w += inv[a][b] * xty[b];
        CHECK(std::fabs(fit.coefficients[a] - static_cast<double>(w)) < 1e-8);
      }
    }
  }
}

TEST_CASE("cholesky solve residual is small on well-conditioned systems") {
  Rng rng(77);
  for (std::size_t n : {1u, 2u, 5u, 12u, 30u}) {
    Matrix g(n + 5, n);
    for (std::size_t i = 0; i < n + 5; ++i)
      for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.normal();
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0;
        for (std::size_t k = 0; k < n + 5; ++k) s += g(k, i) * g(k, j);
        a(i, j) = s + (i == j ? 1.0 : 0.0);
      }
    }
    std::vector<double> b(n);
    for (auto& v : b) v = rng.normal();
    const auto w = cholesky_solve(a, b);
    double rr = 0, bb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * w[j];
      rr += (s - b[i]) * (s - b[i]);
      bb += b[i] * b[i];
    }
    CHECK(std::sqrt(rr / bb) <= 1e-8);
  }
}

TEST_CASE("collinear designs are rescued by jitter") {
  Matrix x(20, 3);
  std::vector<double> y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = static_cast<double>(i);
    x(i, 2) = 2.0 * static_cast<double>(i);
    y[i] = static_cast<double>(i);
  }
  const auto fit = ols_solve(x, y, 0.0);
  double worst = 0;
  for (std::size_t i = 0; i < 20; ++i) {
    double pred = 0;
    for (std::size_t j = 0; j < 3; ++j) pred += x(i, j) * fit.coefficients[j];
    worst = std::max(worst, std::fabs(pred - y[i]));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("ols rejects bad input") {
  Matrix wide(2, 3, 1.0);
  const std::vector<double> y2{1, 2};
  CHECK_THROWS_AS(ols_solve(wide, y2, 0.0), PreconditionError);
  CHECK_NOTHROW(ols_solve(wide, y2, 1.0));
  const std::vector<double> bad{1, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(ols_solve(Matrix(2, 1, 1.0), bad, 0.0), NumericError);
  CHECK_THROWS_AS(ols_solve(Matrix(2, 1, 1.0), std::vector<double>{1.0}, 0.0), PreconditionError);
}

TEST_CASE("normal quantile") {
  CHECK(normal_cdf_inv(0.5) == 0.0);
  const double oracle = static_cast<double>(oracle_inv(0.975L));
  CHECK(std::fabs(oracle - 1.959964) < 1e-5);
  CHECK(std::fabs(normal_cdf_inv(0.975) - oracle) < 1e-5);
  CHECK_THROWS_AS(normal_cdf_inv(0.0), PreconditionError);
  CHECK_THROWS_AS(normal_cdf_inv(1.0), PreconditionError);
  CHECK_THROWS_AS(normal_cdf_inv(-0.1), PreconditionError);
  CHECK_THROWS_AS(normal_cdf_inv(std::nan("")), PreconditionError);
}

TEST_CASE("normal quantile accuracy against the series oracle") {
  double worst = 0;
  std::vector<double> grid;
  for (int e = -6; e <= -1; ++e) {
    for (double m : {1.0, 2.0, 5.0}) grid.push_back(m * std::pow(10.0, e));
  }
  for (int i = 1; i < 200; ++i) grid.push_back(i / 200.0);
  const std::size_t base = grid.size();
  for (std::size_t i = 0; i < base; ++i) grid.push_back(1.0 - grid[i]);
  for (double p : grid) {
    if (p < 1e-6 || p > 1 - 1e-6) continue;
    worst = std::max(worst, std::fabs(normal_cdf_inv(p) - static_cast<double>(oracle_inv(p))));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("normal cdf round trip") {
  double worst = 0;
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    worst = std::max(worst, std::fabs(normal_cdf(normal_cdf_inv(p)) - p));
  }
  for (double p : {1e-6, 1e-5, 1e-4, 1 - 1e-4, 1 - 1e-6}) {
    worst = std::max(worst, std::fabs(normal_cdf(normal_cdf_inv(p)) - p));
  }
  CHECK(worst <= 1e-8);
  CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
}
