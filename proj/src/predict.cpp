#include "fairimpute/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

#include "fairimpute/errors.hpp"
#include "fairimpute/linalg.hpp"
#include "fairimpute/metrics.hpp"
#include "fairimpute/simd.hpp"

namespace fairimpute {

namespace {

using Columns = std::vector<std::vector<double>>;

double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

Columns columns_of(const Matrix& x) {
  Columns out(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) out[j] = x.column(j);
  return out;
}

void check_outcome(std::span<const std::uint8_t> y, std::size_t n) {
  if (y.size() != n) throw PreconditionError("logistic: outcome length does not match rows");
  std::size_t pos = 0;
  for (auto v : y) pos += v != 0;
  if (pos == 0 || pos == n) {
    throw PreconditionError("logistic: training outcome has a single class");
  }
}

struct Problem {
  const Columns& x;
  std::vector<double> y;
  double lambda;
  bool intercept;

  std::vector<double> linear(std::span<const double> w, double b) const {
    std::vector<double> eta(y.size(), b);
    for (std::size_t j = 0; j < x.size(); ++j) simd::axpy(w[j], x[j], eta);
    return eta;
  }

  double loss(std::span<const double> w, double b) const {
    const auto eta = linear(w, b);
    double s = 0.0;
    for (std::size_t i = 0; i < eta.size(); ++i) s += softplus(eta[i]) - y[i] * eta[i];
    return s + 0.5 * lambda * simd::dot(w, w);
  }

  // gradient over (w..., b); b's entry is present even without intercept
  std::vector<double> gradient(std::span<const double> w, std::span<const double> eta,
                               std::vector<double>& resid) const {
    const std::size_t p = x.size();
    resid.resize(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) resid[i] = sigmoid(eta[i]) - y[i];
    std::vector<double> g(p + 1);
    for (std::size_t j = 0; j < p; ++j) g[j] = simd::dot(resid, x[j]) + lambda * w[j];
    g[p] = intercept ? simd::sum(resid) : 0.0;
    return g;
  }
};

double norm2(std::span<const double> v) { return std::sqrt(simd::dot(v, v)); }

LogisticFit solve(const Problem& prob, const LogisticSpec& spec, std::span<const double> start) {
  const std::size_t p = prob.x.size();
  const std::size_t n = prob.y.size();
  const std::size_t k = prob.intercept ? p + 1 : p;

  std::vector<double> w(p, 0.0);
  double b = 0.0;
  if (!start.empty()) {
    if (start.size() != p + 1) throw PreconditionError("logistic: start vector has wrong length");
    std::copy_n(start.begin(), p, w.begin());
    b = prob.intercept ? start[p] : 0.0;
  } else if (prob.intercept) {
    double pos = simd::sum(prob.y);
    b = std::log(pos / (static_cast<double>(n) - pos));
  }

  std::vector<double> resid;
  std::vector<double> weights(n);
  auto eta = prob.linear(w, b);
  double loss = prob.loss(w, b);
  LogisticFit fit;

  for (int it = 0; it <= spec.max_iterations; ++it) {
    std::vector<double> g = prob.gradient(w, eta, resid);
    fit.gradient_norm = norm2(g);
    fit.iterations = it;
    if (fit.gradient_norm <= spec.tolerance) break;
    if (it == spec.max_iterations) {
      throw NumericError("logistic: no convergence after " + std::to_string(it) +
                         " iterations, gradient norm " + std::to_string(fit.gradient_norm));
    }

    for (std::size_t i = 0; i < n; ++i) {
      const double s = sigmoid(eta[i]);
      weights[i] = s * (1.0 - s);
    }
    Matrix h(k, k);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t c = 0; c <= a; ++c) {
        h(a, c) = h(c, a) = simd::weighted_dot(weights, prob.x[a], prob.x[c]);
      }
      h(a, a) += prob.lambda;
      if (prob.intercept) h(a, p) = h(p, a) = simd::dot(weights, prob.x[a]);
    }
    if (prob.intercept) h(p, p) = simd::sum(weights);

    std::vector<double> rhs(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(k));
    const std::vector<double> step = cholesky_solve(h, rhs);
    const double decrement = simd::dot(rhs, step);

    double t = 1.0;
    bool accepted = false;
    std::vector<double> w_new(p);
    double b_new = b;
    // Inside the quadratic region the expected decrease is below the rounding
    // level of the summed loss, so comparisons are noise; take the full step.
    if (0.5 * decrement <= 1e-10 * std::max(1.0, std::abs(loss))) {
      for (std::size_t j = 0; j < p; ++j) w[j] -= step[j];
      if (prob.intercept) b -= step[p];
      loss = prob.loss(w, b);
      eta = prob.linear(w, b);
      continue;
    }
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t j = 0; j < p; ++j) w_new[j] = w[j] - t * step[j];
      b_new = prob.intercept ? b - t * step[p] : 0.0;
      const double cand = prob.loss(w_new, b_new);
      if (cand <= loss - 1e-4 * t * decrement) {
        w.swap(w_new);
        b = b_new;
        loss = cand;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      throw NumericError("logistic: line search failed, gradient norm " +
                         std::to_string(fit.gradient_norm));
    }
    eta = prob.linear(w, b);
  }
  fit.coefficients = std::move(w);
  fit.intercept = b;
  return fit;
}

FeatureScaler make_scaler(const Matrix& x, std::size_t scaled_cols, bool standardise) {
  FeatureScaler s;
  s.mean.assign(x.cols(), 0.0);
  s.scale.assign(x.cols(), 1.0);
  if (!standardise) return s;
  const double n = static_cast<double>(x.rows());
  for (std::size_t j = 0; j < scaled_cols; ++j) {
    const auto col = x.column(j);
    const double m = simd::sum(col) / n;
    std::vector<double> centred(col.size(), m);
    const double var = simd::sum_sq_diff(col, centred) / n;
    s.mean[j] = m;
    s.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Columns scaled_columns(const Matrix& x, const FeatureScaler& s) {
  Columns cols = columns_of(x);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (s.mean[j] == 0.0 && s.scale[j] == 1.0) continue;
    for (double& v : cols[j]) v = (v - s.mean[j]) / s.scale[j];
  }
  return cols;
}

std::vector<std::string> feature_names(const ImputationResult& data) {
  const std::size_t d = data.completed.front().cols();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  if (data.indicators_appended()) {
    for (std::size_t j = 0; j < d; ++j) names.push_back("missing_x" + std::to_string(j + 1));
  }
  return names;
}

FittedModel fit_draws(const ImputationResult& data, const BinaryLabels& outcome,
                      const LogisticSpec& spec, double lambda) {
  if (data.draws() == 0) throw PreconditionError("logistic: no imputation draws");
  check_outcome(outcome, data.rows());
  FittedModel model;
  model.penalty = lambda;
  model.feature_names = feature_names(data);
  std::vector<double> y(outcome.begin(), outcome.end());
  for (std::size_t k = 0; k < data.draws(); ++k) {
    const Matrix x = data.features(k);
    model.feature_count = x.cols();
    DrawModel dm;
    dm.scaler = make_scaler(x, data.completed[k].cols(), spec.standardise);
    const Columns cols = scaled_columns(x, dm.scaler);
    Problem prob{cols, y, lambda, spec.fit_intercept};
    dm.fit = solve(prob, spec, {});
    model.draws.push_back(std::move(dm));
  }
  return model;
}

}  // namespace

void LogisticSpec::validate() const {
  for (double l : penalty_grid) {
    if (!(l > 0.0)) throw ConfigError("LogisticSpec: penalty values must be positive");
  }
  if (fixed_penalty && !(*fixed_penalty > 0.0)) {
    throw ConfigError("LogisticSpec: fixed penalty must be positive");
  }
  if (max_iterations < 1) throw ConfigError("LogisticSpec: max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw ConfigError("LogisticSpec: tolerance must be positive");
}

double logistic_loss(const Matrix& x, std::span<const std::uint8_t> y, std::span<const double> w,
                     double b, double lambda) {
  if (w.size() != x.cols()) throw PreconditionError("logistic: coefficient count mismatch");
  const Columns cols = columns_of(x);
  Problem prob{cols, std::vector<double>(y.begin(), y.end()), lambda, true};
  return prob.loss(w, b);
}

std::vector<double> logistic_gradient(const Matrix& x, std::span<const std::uint8_t> y,
                                      std::span<const double> w, double b, double lambda) {
  if (w.size() != x.cols()) throw PreconditionError("logistic: coefficient count mismatch");
  const Columns cols = columns_of(x);
  Problem prob{cols, std::vector<double>(y.begin(), y.end()), lambda, true};
  std::vector<double> resid;
  return prob.gradient(w, prob.linear(w, b), resid);
}

LogisticFit fit_logistic(const Matrix& x, std::span<const std::uint8_t> y, double lambda,
                         const LogisticSpec& spec, std::span<const double> start) {
  spec.validate();
  if (!(lambda > 0.0)) throw PreconditionError("logistic: penalty must be positive");
  check_outcome(y, x.rows());
  const Columns cols = columns_of(x);
  Problem prob{cols, std::vector<double>(y.begin(), y.end()), lambda, spec.fit_intercept};
  return solve(prob, spec, start);
}

FittedModel train(const ImputationResult& data, const BinaryLabels& outcome,
                  const LogisticSpec& spec) {
  spec.validate();
  if (!spec.fixed_penalty) {
    throw ConfigError("logistic: no tuning data and no fixed penalty");
  }
  return fit_draws(data, outcome, spec, *spec.fixed_penalty);
}

FittedModel train(const ImputationResult& data, const BinaryLabels& outcome,
                  const LogisticSpec& spec, const ImputationResult& tune,
                  const BinaryLabels& tune_outcome) {
  spec.validate();
  if (spec.penalty_grid.empty()) throw ConfigError("logistic: empty penalty grid");
  std::optional<FittedModel> best;
  double best_auc = -1.0;
  std::vector<double> aucs;
  for (double lambda : spec.penalty_grid) {
    FittedModel m = fit_draws(data, outcome, spec, lambda);
    const double a = auc_score(predict(m, tune), tune_outcome);
    aucs.push_back(a);
    if (a > best_auc) {
      best_auc = a;
      best = std::move(m);
    }
  }
  best->tuning_auc = std::move(aucs);
  return std::move(*best);
}

std::vector<double> predict(const FittedModel& model, const ImputationResult& data) {
  if (data.draws() == 0) throw PreconditionError("predict: no imputation draws");
  if (data.draws() != 1 && data.draws() != model.draws.size()) {
    throw PreconditionError("predict: data has " + std::to_string(data.draws()) +
                            " draws, model has " + std::to_string(model.draws.size()));
  }
  const std::size_t n = data.rows();
  std::vector<double> score(n, 0.0);
  std::optional<Matrix> shared;
  if (data.draws() == 1) shared = data.features(0);
  for (std::size_t k = 0; k < model.draws.size(); ++k) {
    const Matrix x = shared ? *shared : data.features(k);
    if (x.cols() != model.feature_count) {
      throw SchemaError("predict: data has " + std::to_string(x.cols()) +
                        " features, model expects " + std::to_string(model.feature_count));
    }
    const DrawModel& dm = model.draws[k];
    const Columns cols = scaled_columns(x, dm.scaler);
    std::vector<double> eta(n, dm.fit.intercept);
    for (std::size_t j = 0; j < cols.size(); ++j) simd::axpy(dm.fit.coefficients[j], cols[j], eta);
    for (std::size_t i = 0; i < n; ++i) score[i] += sigmoid(eta[i]);
  }
  const double inv = 1.0 / static_cast<double>(model.draws.size());
  for (double& s : score) s *= inv;
  return score;
}

std::string to_json(const FittedModel& model) {
  using nlohmann::json;
  json j;
  j["format"] = "fairimpute.logistic";
  j["version"] = 1;
  j["penalty"] = model.penalty;
  j["feature_names"] = model.feature_names;
  j["tuning_auc"] = model.tuning_auc;
  json draws = json::array();
  for (const auto& d : model.draws) {
    draws.push_back({{"coefficients", d.fit.coefficients},
                     {"intercept", d.fit.intercept},
                     {"feature_mean", d.scaler.mean},
                     {"feature_scale", d.scaler.scale},
                     {"iterations", d.fit.iterations},
                     {"gradient_norm", d.fit.gradient_norm}});
  }
  j["draws"] = draws;
  return j.dump(2);
}

}  // namespace fairimpute
