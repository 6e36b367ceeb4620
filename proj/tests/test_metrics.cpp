#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fairimpute/errors.hpp"
#include "fairimpute/metrics.hpp"
#include "fairimpute/rng.hpp"

using namespace fairimpute;

namespace {

struct Scored {
  std::vector<double> scores;
  BinaryLabels outcomes;
  BinaryLabels groups;
};

Scored random_scored(std::size_t n, std::uint64_t seed, double separation = 1.0) {
  Rng rng(seed);
  Scored s;
  for (std::size_t i = 0; i < n; ++i) {
    const bool y = rng.bernoulli(0.4);
    s.outcomes.push_back(y);
    s.groups.push_back(rng.bernoulli(0.3));
    s.scores.push_back(separation * y + rng.normal());
  }
  return s;
}

// Pairwise AUC by enumeration.
double brute_auc(const std::vector<double>& s, const BinaryLabels& y) {
  double credit = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      credit += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return credit / pairs;
}

}  // namespace

TEST_CASE("auc examples") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const BinaryLabels y{0, 0, 1, 1};
  CHECK(auc_score(s, y) == 0.75);
  const std::vector<double> flat(4, 0.3);
  CHECK(auc_score(flat, y) == 0.5);
  const std::vector<double> perfect{0, 0, 1, 1};
  CHECK(auc_score(perfect, y) == 1.0);
  CHECK_THROWS_AS(auc_score(s, BinaryLabels{1, 1, 1, 1}), UndefinedMetricError);
}

TEST_CASE("auc with ties matches pairwise enumeration") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s(60);
    BinaryLabels y(60);
    for (std::size_t i = 0; i < 60; ++i) {
      s[i] = static_cast<double>(rng.below(7));
      y[i] = rng.bernoulli(0.5);
    }
    CHECK(auc_score(s, y) == doctest::Approx(brute_auc(s, y)).epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant under increasing transforms") {
  const Scored d = random_scored(500, 4);
  const double base = auc_score(d.scores, d.outcomes);
  std::vector<double> t1, t2, t3;
  for (double v : d.scores) {
    t1.push_back(std::exp(v));
    t2.push_back(1.0 / (1.0 + std::exp(-3.0 * v)));
    t3.push_back(v * v * v + 7.0 * v);
  }
  CHECK(auc_score(t1, d.outcomes) == base);
  CHECK(auc_score(t2, d.outcomes) == base);
  CHECK(auc_score(t3, d.outcomes) == base);
}

TEST_CASE("group auc and gap sign") {
  const Scored d = random_scored(2000, 5);
  const auto m = auc(d.scores, d.outcomes, d.groups);
  REQUIRE(m.gap.has_value());
  CHECK(*m.gap == *m.marginalised - *m.rest);
  // Undefined side leaves the gap undefined.
  BinaryLabels y = d.outcomes;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (d.groups[i]) y[i] = 1;
  const auto u = auc(d.scores, y, d.groups);
  CHECK_FALSE(u.marginalised.has_value());
  CHECK_FALSE(u.gap.has_value());
  CHECK(u.rest.has_value());
}

TEST_CASE("threshold metrics at full capacity") {
  const Scored d = random_scored(100, 6);
  const auto t = threshold_metrics(d.scores, d.outcomes, d.groups, 1.0);
  CHECK(*t.fnr.overall == 0.0);
  CHECK(*t.prioritisation.marginalised == 1.0);
  CHECK(*t.prioritisation.rest == 1.0);
  CHECK(*t.fnr.gap == 0.0);
}

TEST_CASE("perfect ranking at half capacity on balanced data") {
  std::vector<double> s;
  BinaryLabels y, g;
  for (int i = 0; i < 20; ++i) {
    y.push_back(i % 2);
    s.push_back(i % 2);
    g.push_back(i % 4 < 2);
  }
  const auto t = threshold_metrics(s, y, g, 0.5);
  CHECK(*t.fnr.overall == 0.0);
  CHECK(*t.fnr.marginalised == 0.0);
}

TEST_CASE("ten-row brute force") {
  const std::vector<double> s{0.9, 0.1, 0.8, 0.3, 0.7, 0.2, 0.6, 0.5, 0.4, 0.05};
  const BinaryLabels y{1, 1, 0, 1, 1, 0, 1, 0, 1, 0};
  const BinaryLabels g{1, 0, 0, 1, 0, 1, 1, 0, 0, 1};
  const auto t = threshold_metrics(s, y, g, 0.3);
  // top 3: rows 0, 2, 4
  std::vector<bool> chosen(10, false);
  std::vector<std::size_t> order(10);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  for (int k = 0; k < 3; ++k) chosen[order[k]] = true;
  auto fnr_of = [&](int grp) {
    double pos = 0, missed = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      if (!y[i] || (grp >= 0 && g[i] != grp)) continue;
      pos += 1;
      missed += !chosen[i];
    }
    return missed / pos;
  };
  CHECK(*t.fnr.overall == doctest::Approx(fnr_of(-1)));
  CHECK(*t.fnr.marginalised == doctest::Approx(fnr_of(1)));
  CHECK(*t.fnr.rest == doctest::Approx(fnr_of(0)));
  CHECK(*t.fnr.marginalised == doctest::Approx(2.0 / 3.0));
  CHECK(*t.prioritisation.marginalised == doctest::Approx(1.0 / 5.0));
  CHECK(*t.prioritisation.rest == doctest::Approx(2.0 / 5.0));
  CHECK(*t.fnr.gap == *t.fnr.marginalised - *t.fnr.rest);
}

TEST_CASE("ties at the cut go to the lower row index") {
  const std::vector<double> s{0.5, 0.5, 0.5, 0.5};
  const BinaryLabels y{1, 1, 1, 1};
  const BinaryLabels g{0, 0, 1, 1};
  const auto t = threshold_metrics(s, y, g, 0.5);
  CHECK(*t.fnr.rest == 0.0);
  CHECK(*t.fnr.marginalised == 1.0);
}

TEST_CASE("fnr is non-increasing in capacity") {
  const Scored d = random_scored(3000, 7);
  std::optional<double> prev_overall, prev_marg;
  for (int k = 1; k <= 100; ++k) {
    const auto t = threshold_metrics(d.scores, d.outcomes, d.groups, k / 100.0);
    if (prev_overall) {
      CHECK(*t.fnr.overall <= *prev_overall);
      CHECK(*t.fnr.marginalised <= *prev_marg);
    }
    prev_overall = t.fnr.overall;
    prev_marg = t.fnr.marginalised;
  }
  CHECK_THROWS_AS(threshold_metrics(d.scores, d.outcomes, d.groups, 0.0), PreconditionError);
  CHECK_THROWS_AS(threshold_metrics(d.scores, d.outcomes, d.groups, 1.5), PreconditionError);
}

TEST_CASE("reconstruction error") {
  Matrix truth = Matrix::from_rows({{1.0}, {2.0}, {3.0}, {4.0}});
  const Cohort c(truth, {0, 0, 1, 1}, {0, 1, 0, 1});
  ObservationMask m(4, 1);
  m.set(1, 0, false);
  m.set(3, 0, false);
  SUBCASE("perfect imputation scores zero") {
    ImputationResult r;
    r.completed.push_back(truth);
    const auto e = reconstruction_error(c, m, r, 0);
    CHECK(*e.overall == 0.0);
    CHECK(*e.marginalised == 0.0);
    CHECK(*e.gap == 0.0);
  }
  SUBCASE("several draws average per-draw errors") {
    ImputationResult a, b, both;
    a.completed.push_back(Matrix::from_rows({{1.0}, {0.0}, {3.0}, {5.0}}));
    b.completed.push_back(Matrix::from_rows({{1.0}, {3.0}, {3.0}, {1.0}}));
    both.completed = {a.completed[0], b.completed[0]};
    const auto ea = reconstruction_error(c, m, a, 0);
    const auto eb = reconstruction_error(c, m, b, 0);
    const auto e = reconstruction_error(c, m, both, 0);
    CHECK(*ea.rest == 4.0);
    CHECK(*ea.marginalised == 1.0);
    CHECK(*e.marginalised == doctest::Approx(0.5 * (*ea.marginalised + *eb.marginalised)));
    CHECK(*e.rest == doctest::Approx(0.5 * (*ea.rest + *eb.rest)));
    CHECK(*e.overall == doctest::Approx(0.5 * (*ea.overall + *eb.overall)));
    CHECK(*e.gap == doctest::Approx(*e.marginalised - *e.rest));
  }
  SUBCASE("a group without masked entries scores zero") {
    ObservationMask only(4, 1);
    only.set(3, 0, false);
    ImputationResult r;
    r.completed.push_back(Matrix::from_rows({{1.0}, {2.0}, {3.0}, {6.0}}));
    const auto e = reconstruction_error(c, only, r, 0);
    CHECK(*e.rest == 0.0);
    CHECK(*e.gap == 4.0);
  }
  SUBCASE("nothing masked is undefined") {
    ImputationResult r;
    r.completed.push_back(truth);
    CHECK_THROWS_AS(reconstruction_error(c, ObservationMask(4, 1), r, 0), UndefinedMetricError);
  }
}

TEST_CASE("bootstrap basics") {
  const MetricFn constant = [](std::span<const std::size_t>) {
    return std::vector<std::optional<double>>{2.5, -1.0};
  };
  const auto s = bootstrap(constant, 50, 20, 1);
  REQUIRE(s.size() == 2);
  CHECK(s[0].mean == 2.5);
  CHECK(s[0].std == 0.0);
  CHECK(s[0].lower == 2.5);
  CHECK(s[0].upper == 2.5);
  const MetricFn first_row = [](std::span<const std::size_t> rows) {
    return std::vector<std::optional<double>>{static_cast<double>(rows[0])};
  };
  const auto one = bootstrap(first_row, 50, 1, 9);
  CHECK(one[0].n_resamples == 1);
  CHECK(one[0].lower <= one[0].mean);
  CHECK(one[0].mean <= one[0].upper);
  CHECK(bootstrap(first_row, 50, 30, 9)[0].mean == bootstrap(first_row, 50, 30, 9)[0].mean);
}

TEST_CASE("bootstrap drops undefined resamples and gives up past half") {
  int calls = 0;
  const MetricFn sometimes = [&](std::span<const std::size_t>) {
    ++calls;
    return std::vector<std::optional<double>>{calls % 4 == 0 ? std::nullopt : std::optional<double>(1.0)};
  };
  const auto s = bootstrap(sometimes, 10, 40, 2);
  CHECK(s[0].n_undefined == 10);
  CHECK(s[0].n_resamples == 30);
  const MetricFn mostly = [](std::span<const std::size_t>) {
    return std::vector<std::optional<double>>{std::nullopt};
  };
  CHECK_THROWS_AS(bootstrap(mostly, 10, 10, 3), ReliabilityError);
}

TEST_CASE("bootstrap auc spread matches the Hanley-McNeil approximation") {
  const Scored d = random_scored(1000, 8, 1.2);
  const double a = auc_score(d.scores, d.outcomes);
  double n1 = 0, n2 = 0;
  for (auto y : d.outcomes) (y ? n1 : n2) += 1;
  const double q1 = a / (2 - a), q2 = 2 * a * a / (1 + a);
  const double hm = std::sqrt((a * (1 - a) + (n1 - 1) * (q1 - a * a) + (n2 - 1) * (q2 - a * a)) / (n1 * n2));
  const MetricFn metric = [&](std::span<const std::size_t> rows) {
    std::vector<double> s;
    BinaryLabels y;
    for (auto r : rows) {
      s.push_back(d.scores[r]);
      y.push_back(d.outcomes[r]);
    }
    return std::vector<std::optional<double>>{auc_score(s, y)};
  };
  const auto b = bootstrap(metric, 1000, 400, 11);
  CHECK(std::fabs(b[0].std - hm) <= 0.3 * hm);
  CHECK(b[0].lower < a);
  CHECK(a < b[0].upper);
}

TEST_CASE("percentile interpolates") {
  CHECK(percentile({3, 1, 2, 4}, 0.5) == 2.5);
  CHECK(percentile({3, 1, 2, 4}, 0.0) == 1.0);
  CHECK(percentile({3, 1, 2, 4}, 1.0) == 4.0);
  CHECK(percentile({5}, 0.975) == 5.0);
}
