#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairimpute/data_model.hpp"

namespace fairimpute {

/// Ridge logistic regression. The objective is the summed log-loss plus
/// lambda |w|^2 / 2; the intercept is not penalised.
struct LogisticSpec {
  std::vector<double> penalty_grid{0.1, 1.0, 10.0, 100.0};
  /// Used when no tuning data is supplied.
  std::optional<double> fixed_penalty = 1.0;
  int max_iterations = 100;
  double tolerance = 1e-8;
  bool fit_intercept = true;
  /// Scale non-indicator features to train mean 0 / variance 1 per draw.
  bool standardise = false;

  void validate() const;
};

struct LogisticFit {
  std::vector<double> coefficients;
  double intercept = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
};

/// Objective value at (w, b).
double logistic_loss(const Matrix& x, std::span<const std::uint8_t> y,
                     std::span<const double> w, double b, double lambda);
/// Gradient of logistic_loss: d/dw followed by d/db.
std::vector<double> logistic_gradient(const Matrix& x, std::span<const std::uint8_t> y,
                                      std::span<const double> w, double b, double lambda);

/// Damped Newton. `start` optionally seeds (w..., b). Throws NumericError with
/// the final gradient norm if it has not converged after max_iterations.
LogisticFit fit_logistic(const Matrix& x, std::span<const std::uint8_t> y, double lambda,
                         const LogisticSpec& spec,
                         std::span<const double> start = {});

struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> scale;
};

struct DrawModel {
  FeatureScaler scaler;
  LogisticFit fit;
};

/// One logistic model per imputation draw.
struct FittedModel {
  std::vector<DrawModel> draws;
  double penalty = 1.0;
  std::size_t feature_count = 0;
  std::vector<std::string> feature_names;
  /// Tuning AUC per grid value, when a grid search ran.
  std::vector<double> tuning_auc;
};

/// Fits a model per draw with the fixed penalty.
FittedModel train(const ImputationResult& data, const BinaryLabels& outcome,
                  const LogisticSpec& spec);
/// Picks the grid penalty maximising the tuning AUC of the averaged
/// prediction; the first maximum wins.
FittedModel train(const ImputationResult& data, const BinaryLabels& outcome,
                  const LogisticSpec& spec, const ImputationResult& tune,
                  const BinaryLabels& tune_outcome);

/// Mean over draws of the per-draw sigmoid output. A single-draw input is
/// broadcast across every model.
std::vector<double> predict(const FittedModel& model, const ImputationResult& data);

std::string to_json(const FittedModel& model);

}  // namespace fairimpute
