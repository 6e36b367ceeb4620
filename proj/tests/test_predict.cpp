#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fairimpute/errors.hpp"
#include "fairimpute/metrics.hpp"
#include "fairimpute/predict.hpp"
#include "fairimpute/rng.hpp"

using namespace fairimpute;

namespace {

struct Toy {
  Matrix x;
  BinaryLabels y;
};

Toy random_toy(std::size_t n, std::size_t p, std::uint64_t seed, double signal = 1.0) {
  Rng rng(seed);
  Toy t{Matrix(n, p), BinaryLabels(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double eta = -0.3;
    for (std::size_t j = 0; j < p; ++j) {
      t.x(i, j) = rng.normal();
      eta += signal * (j % 2 == 0 ? 1.0 : -0.5) * t.x(i, j);
    }
    t.y[i] = rng.uniform() < 1.0 / (1.0 + std::exp(-eta));
  }
  return t;
}

ImputationResult single(Matrix x) {
  ImputationResult r;
  r.completed.push_back(std::move(x));
  return r;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Toy t = random_toy(30, 4, seed);
    Rng rng(seed + 100);
    std::vector<double> w(4);
    for (auto& v : w) v = rng.normal();
    const double b = rng.normal();
    const double lambda = 0.1 + rng.uniform() * 10;
    const auto g = logistic_gradient(t.x, t.y, w, b, lambda);
    REQUIRE(g.size() == 5);
    std::vector<double> fd(5), diff(5);
    for (std::size_t k = 0; k < 5; ++k) {
      const double h = 1e-5;
      auto wp = w, wm = w;
      double bp = b, bm = b;
      if (k < 4) {
        wp[k] += h;
        wm[k] -= h;
      } else {
        bp += h;
        bm -= h;
      }
      fd[k] = (logistic_loss(t.x, t.y, wp, bp, lambda) - logistic_loss(t.x, t.y, wm, bm, lambda)) / (2 * h);
      diff[k] = g[k] - fd[k];
      CHECK(std::fabs(diff[k]) <= 1e-6 * std::max(1.0, std::fabs(g[k])));
    }
    CHECK(norm(diff) <= 1e-6 * norm(g));
  }
}

TEST_CASE("converged fit is a stationary point and start-independent") {
  const Toy t = random_toy(500, 5, 3);
  LogisticSpec spec;
  const auto a = fit_logistic(t.x, t.y, 1.0, spec);
  CHECK(a.gradient_norm <= spec.tolerance);
  const auto g = logistic_gradient(t.x, t.y, a.coefficients, a.intercept, 1.0);
  CHECK(norm(g) <= spec.tolerance);
  const std::vector<double> start{3, -3, 3, -3, 3, 2};
  const auto b = fit_logistic(t.x, t.y, 1.0, spec, start);
  for (std::size_t j = 0; j < 5; ++j) CHECK(std::fabs(a.coefficients[j] - b.coefficients[j]) < 1e-6);
  CHECK(std::fabs(a.intercept - b.intercept) < 1e-6);
}

TEST_CASE("separable data stays finite under the penalty") {
  Matrix x(20, 1);
  BinaryLabels y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    x(i, 0) = static_cast<double>(i) - 9.5;
    y[i] = i >= 10;
  }
  LogisticSpec spec;
  const auto fit = fit_logistic(x, y, 1.0, spec);
  CHECK(std::isfinite(fit.coefficients[0]));
  CHECK(fit.coefficients[0] > 0);
  std::vector<double> scores(20);
  for (std::size_t i = 0; i < 20; ++i) scores[i] = fit.coefficients[0] * x(i, 0) + fit.intercept;
  CHECK(auc_score(scores, y) == 1.0);
}

TEST_CASE("no signal gives near-zero coefficients") {
  // Mirror every row with the opposite label: the optimum is exactly w = 0.
  const Toy base = random_toy(200, 3, 4, 0.0);
  Matrix x(400, 3);
  BinaryLabels y(400);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = x(i + 200, j) = base.x(i, j);
    y[i] = 1;
    y[i + 200] = 0;
  }
  LogisticSpec spec;
  const auto fit = fit_logistic(x, y, 1.0, spec);
  CHECK(norm(fit.coefficients) < 1e-8);
  CHECK(std::fabs(fit.intercept) < 1e-8);
}

TEST_CASE("a huge penalty shrinks the weights") {
  const Toy t = random_toy(300, 4, 5, 2.0);
  LogisticSpec spec;
  CHECK(norm(fit_logistic(t.x, t.y, 1e6, spec).coefficients) < 1e-3);
}

TEST_CASE("single-class outcome and bad penalties are rejected") {
  const Toy t = random_toy(10, 2, 6);
  LogisticSpec spec;
  CHECK_THROWS_AS(fit_logistic(t.x, BinaryLabels(10, 1), 1.0, spec), PreconditionError);
  CHECK_THROWS_AS(fit_logistic(t.x, t.y, 0.0, spec), PreconditionError);
  spec.penalty_grid = {1.0, -1.0};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("non-convergence reports the gradient norm") {
  const Toy t = random_toy(200, 3, 7);
  LogisticSpec spec;
  spec.max_iterations = 1;
  spec.tolerance = 1e-300;
  CHECK_THROWS_WITH_AS(fit_logistic(t.x, t.y, 1.0, spec), doctest::Contains("gradient norm"), NumericError);
}

TEST_CASE("prediction averaging") {
  const Toy t = random_toy(200, 3, 8);
  LogisticSpec spec;
  const auto one = single(t.x);
  const auto model = train(one, t.y, spec);
  const auto scores = predict(model, one);
  const auto& f = model.draws[0].fit;
  for (std::size_t i = 0; i < 5; ++i) {
    double eta = f.intercept;
    for (std::size_t j = 0; j < 3; ++j) eta += f.coefficients[j] * t.x(i, j);
    CHECK(scores[i] == doctest::Approx(1.0 / (1.0 + std::exp(-eta))).epsilon(1e-14));
  }
  SUBCASE("duplicated draws give the single-draw scores") {
    ImputationResult two = one;
    two.completed.push_back(t.x);
    const auto m2 = train(two, t.y, spec);
    const auto s2 = predict(m2, two);
    for (std::size_t i = 0; i < s2.size(); ++i) CHECK(s2[i] == doctest::Approx(scores[i]).epsilon(1e-15));
  }
  SUBCASE("draw order does not matter") {
    const Toy u = random_toy(200, 3, 9);
    ImputationResult ab, ba;
    ab.completed = {t.x, u.x};
    ba.completed = {u.x, t.x};
    const auto sa = predict(train(ab, t.y, spec), ab);
    const auto sb = predict(train(ba, t.y, spec), ba);
    for (std::size_t i = 0; i < sa.size(); ++i) CHECK(sa[i] == doctest::Approx(sb[i]).epsilon(1e-14));
  }
  SUBCASE("zero model scores one half") {
    FittedModel zero = model;
    std::fill(zero.draws[0].fit.coefficients.begin(), zero.draws[0].fit.coefficients.end(), 0.0);
    zero.draws[0].fit.intercept = 0.0;
    for (double s : predict(zero, one)) CHECK(s == 0.5);
  }
  SUBCASE("feature mismatch") {
    const Toy narrow = random_toy(10, 2, 1);
    CHECK_THROWS_AS(predict(model, single(narrow.x)), SchemaError);
  }
}

TEST_CASE("grid search picks the best tuning penalty") {
  const Toy t = random_toy(300, 6, 10);
  const Toy v = random_toy(300, 6, 11);
  LogisticSpec spec;
  spec.fixed_penalty.reset();
  spec.penalty_grid = {0.1, 1.0, 1e4};
  const auto model = train(single(t.x), t.y, spec, single(v.x), v.y);
  REQUIRE(model.tuning_auc.size() == 3);
  const auto best = std::max_element(model.tuning_auc.begin(), model.tuning_auc.end());
  CHECK(model.penalty == spec.penalty_grid[best - model.tuning_auc.begin()]);
  spec.fixed_penalty.reset();
  CHECK_THROWS_AS(train(single(t.x), t.y, spec), ConfigError);
}

TEST_CASE("standardisation leaves indicator columns alone") {
  const Toy t = random_toy(200, 2, 12);
  ImputationResult r = single(t.x);
  Matrix ind(200, 2);
  for (std::size_t i = 0; i < 200; i += 3) ind(i, 1) = 1.0;
  r.missing_indicators = ind;
  LogisticSpec spec;
  spec.standardise = true;
  const auto model = train(r, t.y, spec);
  const auto& sc = model.draws[0].scaler;
  REQUIRE(sc.mean.size() == 4);
  CHECK(sc.mean[2] == 0.0);
  CHECK(sc.scale[3] == 1.0);
  CHECK(sc.scale[0] != 1.0);
  CHECK(model.feature_count == 4);
  for (double s : predict(model, r)) CHECK((s > 0.0 && s < 1.0));
}
