#include "fairimpute/impute.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "fairimpute/errors.hpp"
#include "fairimpute/linalg.hpp"
#include "fairimpute/rng.hpp"
#include "fairimpute/simd.hpp"

namespace fairimpute {

namespace {

constexpr int kSerialVersion = 1;

using Columns = std::vector<std::vector<double>>;

bool is_group_strategy(ImputationStrategy s) {
  return s == ImputationStrategy::kGroupMean || s == ImputationStrategy::kGroupMice;
}

bool is_mice(ImputationStrategy s) {
  return s == ImputationStrategy::kMice || s == ImputationStrategy::kGroupMice;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Columns to_columns(const Matrix& m) {
  Columns out(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) out[j] = m.column(j);
  return out;
}

Matrix from_columns(const Columns& cols, std::size_t rows) {
  Matrix out(rows, cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) out.set_column(j, cols[j]);
  return out;
}

/// Group-indicator regressors appended after the covariates.
std::vector<std::vector<double>> group_regressors(const MaskedCohort& data,
                                                  const FittedImputer& f) {
  std::vector<std::vector<double>> out;
  if (f.spec.strategy != ImputationStrategy::kGroupMice) return out;
  out.emplace_back(data.group().begin(), data.group().end());
  if (f.spec.control_all_groups) {
    for (const auto& aux : data.auxiliary_groups()) out.emplace_back(aux.begin(), aux.end());
  }
  return out;
}

double predict_row(const ColumnRegression& reg, const Columns& work,
                   const std::vector<std::vector<double>>& groups, std::size_t target,
                   std::size_t row) {
  double v = reg.coefficients[0];
  std::size_t k = 1;
  for (std::size_t c = 0; c < work.size(); ++c) {
    if (c == target) continue;
    v += reg.coefficients[k++] * work[c][row];
  }
  for (const auto& g : groups) v += reg.coefficients[k++] * g[row];
  return v;
}

/// Cross-products of the full chained-equation design: intercept, every
/// covariate, then group regressors, over all rows. Kept current as columns
/// are refilled so each regression only pays for the rows it excludes.
class GramTracker {
 public:
  GramTracker(const Columns& work, const std::vector<std::vector<double>>& groups, std::size_t n)
      : work_(work), groups_(groups), ones_(n, 1.0), width_(1 + work.size() + groups.size()),
        gram_(width_, width_) {
    for (std::size_t a = 0; a < width_; ++a) {
      for (std::size_t b = 0; b <= a; ++b) {
        gram_(a, b) = gram_(b, a) = simd::dot(column(a), column(b));
      }
    }
  }

  /// Call after covariate `j` has been refilled.
  void refresh(std::size_t j) {
    const std::size_t a = 1 + j;
    for (std::size_t b = 0; b < width_; ++b) {
      gram_(a, b) = gram_(b, a) = simd::dot(column(a), column(b));
    }
  }

  /// OLS of covariate j on every other design column over `observed` rows.
  ColumnRegression regress(std::size_t j, const std::vector<std::size_t>& observed,
                           const std::vector<std::size_t>& missing) const {
    const std::size_t p = width_ - 1;
    ColumnRegression reg;
    if (observed.size() < p + 1) {
      reg.fallback = true;
      return reg;
    }
    const std::size_t target = 1 + j;
    // Subtract the missing rows from the full Gram, or build from the observed
    // rows when those are fewer.
    const bool subtract = missing.size() <= observed.size();
    const auto& rows = subtract ? missing : observed;
    std::vector<std::vector<double>> block(width_, std::vector<double>(rows.size()));
    for (std::size_t a = 0; a < width_; ++a) {
      const auto src = column(a);
      for (std::size_t k = 0; k < rows.size(); ++k) block[a][k] = src[rows[k]];
    }
    auto cross = [&](std::size_t a, std::size_t b) {
      const double part = simd::dot(block[a], block[b]);
      return subtract ? gram_(a, b) - part : part;
    };
    std::vector<std::size_t> idx;
    idx.reserve(p);
    for (std::size_t a = 0; a < width_; ++a) {
      if (a != target) idx.push_back(a);
    }
    Matrix xtx(p, p);
    std::vector<double> xty(p);
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b <= a; ++b) xtx(a, b) = xtx(b, a) = cross(idx[a], idx[b]);
      xty[a] = cross(idx[a], target);
    }
    OlsFit ols = ols_solve_gram(std::move(xtx), xty, cross(target, target), observed.size(), 0.0);
    reg.coefficients = std::move(ols.coefficients);
    reg.residual_std = ols.residual_std;
    return reg;
  }

 private:
  std::span<const double> column(std::size_t a) const {
    if (a == 0) return ones_;
    if (a <= work_.size()) return work_[a - 1];
    return groups_[a - 1 - work_.size()];
  }

  const Columns& work_;
  const std::vector<std::vector<double>>& groups_;
  std::vector<double> ones_;
  std::size_t width_;
  Matrix gram_;
};

std::vector<std::uint8_t> cell_key(const MaskedCohort& data, std::size_t row, std::size_t length) {
  std::vector<std::uint8_t> key;
  key.reserve(length);
  key.push_back(data.group()[row]);
  for (std::size_t a = 0; a + 1 < length; ++a) key.push_back(data.auxiliary_groups()[a][row]);
  return key;
}

std::size_t key_length(const FittedImputer& f) {
  return 1 + (f.spec.control_all_groups ? f.auxiliary_count : 0);
}

double group_fill(const FittedImputer& f, const MaskedCohort& data, std::size_t row,
                  std::size_t col) {
  for (std::size_t len = key_length(f); len >= 1; --len) {
    auto it = f.cell_means.find(cell_key(data, row, len));
    if (it != f.cell_means.end() && it->second[col]) return *it->second[col];
  }
  return f.population_means[col];
}

std::vector<std::vector<std::size_t>> missing_rows(const MaskedCohort& data) {
  std::vector<std::vector<std::size_t>> out(data.cols());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) {
      if (!data.is_observed(i, j)) out[j].push_back(i);
    }
  }
  return out;
}

}  // namespace

std::string_view strategy_name(ImputationStrategy s) {
  switch (s) {
    case ImputationStrategy::kPopulationMean:
      return "PopulationMean";
    case ImputationStrategy::kGroupMean:
      return "GroupMean";
    case ImputationStrategy::kMice:
      return "MICE";
    case ImputationStrategy::kGroupMice:
      return "GroupMICE";
  }
  return "?";
}

ImputationStrategy parse_strategy(std::string_view name) {
  for (auto s : {ImputationStrategy::kPopulationMean, ImputationStrategy::kGroupMean,
                 ImputationStrategy::kMice, ImputationStrategy::kGroupMice}) {
    if (strategy_name(s) == name) return s;
  }
  throw ConfigError("unknown imputation strategy '" + std::string(name) + "'");
}

void ImputerSpec::validate() const {
  if (mice_iterations < 1) throw ConfigError("ImputerSpec: mice_iterations must be >= 1");
  if (mice_draws < 1) throw ConfigError("ImputerSpec: mice_draws must be >= 1");
}

int ImputerSpec::draws() const { return is_mice(strategy) ? mice_draws : 1; }

std::optional<double> FittedImputer::group_mean(std::uint8_t group, std::size_t covariate) const {
  auto it = cell_means.find({group});
  if (it == cell_means.end()) return std::nullopt;
  return it->second.at(covariate);
}

FittedImputer fit(const MaskedCohort& train, const ImputerSpec& spec) {
  spec.validate();
  const std::size_t n = train.rows();
  const std::size_t d = train.cols();

  FittedImputer f;
  f.spec = spec;
  f.covariate_count = d;
  f.auxiliary_count = train.auxiliary_groups().size();

  f.population_means.assign(d, 0.0);
  f.medians.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<double> obs = train.observed_column(j);
    if (obs.empty()) {
      throw PreconditionError("impute: covariate '" + train.covariate_names()[j] +
                              "' has no observed values in the training partition");
    }
    double s = 0.0;
    for (double v : obs) s += v;
    f.population_means[j] = s / static_cast<double>(obs.size());
    f.medians[j] = median(std::move(obs));
  }

  if (is_group_strategy(spec.strategy)) {
    const std::size_t max_len = key_length(f);
    struct Acc {
      std::vector<double> sum;
      std::vector<std::size_t> count;
    };
    std::map<std::vector<std::uint8_t>, Acc> acc;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t len = 1; len <= max_len; ++len) {
        auto& a = acc[cell_key(train, i, len)];
        if (a.sum.empty()) {
          a.sum.assign(d, 0.0);
          a.count.assign(d, 0);
        }
        for (std::size_t j = 0; j < d; ++j) {
          if (auto v = train.observed_value(i, j)) {
            a.sum[j] += *v;
            ++a.count[j];
          }
        }
      }
    }
    for (const auto& [key, a] : acc) {
      std::vector<std::optional<double>> means(d);
      for (std::size_t j = 0; j < d; ++j) {
        if (a.count[j] > 0) {
          means[j] = a.sum[j] / static_cast<double>(a.count[j]);
        } else if (key.size() == 1) {
          f.warnings.push_back("group " + std::to_string(key[0]) + " has no observed '" +
                               train.covariate_names()[j] + "' values; population mean used");
        }
      }
      f.cell_means.emplace(key, std::move(means));
    }
  }

  if (is_mice(spec.strategy)) {
    const auto missing = missing_rows(train);
    std::vector<std::vector<std::size_t>> observed(d);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (train.is_observed(i, j)) observed[j].push_back(i);
      }
    }
    const auto groups = group_regressors(train, f);
    const Columns initial = to_columns(train.filled(f.medians));

    for (int c = 0; c < spec.mice_draws; ++c) {
      Rng rng(derive_seed(spec.seed, {1, static_cast<std::uint64_t>(c)}));
      Columns work = initial;
      GramTracker gram(work, groups, n);
      std::vector<ColumnRegression> regs(d);
      for (int it = 0; it < spec.mice_iterations; ++it) {
        for (std::size_t j = 0; j < d; ++j) {
          if (missing[j].empty()) continue;
          ColumnRegression reg = gram.regress(j, observed[j], missing[j]);
          for (std::size_t i : missing[j]) {
            if (reg.fallback) {
              work[j][i] = f.population_means[j];
              continue;
            }
            double v = predict_row(reg, work, groups, j, i);
            if (spec.noise_draws) v += reg.residual_std * rng.normal();
            work[j][i] = v;
          }
          gram.refresh(j);
          regs[j] = std::move(reg);
        }
      }
      // Complete-in-training columns still need a regression for transform.
      for (std::size_t j = 0; j < d; ++j) {
        if (missing[j].empty()) regs[j] = gram.regress(j, observed[j], missing[j]);
        if (regs[j].fallback && c == 0) {
          f.warnings.push_back("too few observed rows to regress '" +
                               train.covariate_names()[j] + "'; mean imputation used");
        }
      }
      f.chains.push_back(std::move(regs));
    }
  }
  return f;
}

ImputationResult transform(const FittedImputer& f, const MaskedCohort& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  if (d != f.covariate_count) {
    throw SchemaError("impute: data has " + std::to_string(d) + " covariates, imputer was fit on " +
                      std::to_string(f.covariate_count));
  }
  if (f.spec.control_all_groups && data.auxiliary_groups().size() != f.auxiliary_count) {
    throw SchemaError("impute: auxiliary group attributes differ from the fit partition");
  }

  ImputationResult result;
  result.warnings = f.warnings;
  switch (f.spec.strategy) {
    case ImputationStrategy::kPopulationMean:
      result.completed.push_back(data.filled(f.population_means));
      break;
    case ImputationStrategy::kGroupMean: {
      Matrix out = data.filled(f.population_means);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          if (!data.is_observed(i, j)) out(i, j) = group_fill(f, data, i, j);
        }
      }
      result.completed.push_back(std::move(out));
      break;
    }
    case ImputationStrategy::kMice:
    case ImputationStrategy::kGroupMice: {
      const auto missing = missing_rows(data);
      const auto groups = group_regressors(data, f);
      const Columns initial = to_columns(data.filled(f.medians));
      for (std::size_t c = 0; c < f.chains.size(); ++c) {
        Rng rng(derive_seed(f.spec.seed, {2, static_cast<std::uint64_t>(c)}));
        Columns work = initial;
        for (int it = 0; it < f.spec.mice_iterations; ++it) {
          for (std::size_t j = 0; j < d; ++j) {
            const ColumnRegression& reg = f.chains[c][j];
            for (std::size_t i : missing[j]) {
              if (reg.fallback) {
                work[j][i] = f.population_means[j];
                continue;
              }
              double v = predict_row(reg, work, groups, j, i);
              if (f.spec.noise_draws) v += reg.residual_std * rng.normal();
              work[j][i] = v;
            }
          }
        }
        result.completed.push_back(from_columns(work, n));
      }
      break;
    }
  }

  if (f.spec.append_indicators) {
    Matrix ind(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < d; ++j) ind(i, j) = data.is_observed(i, j) ? 0.0 : 1.0;
    }
    result.missing_indicators = std::move(ind);
  }
  return result;
}

std::string to_json(const FittedImputer& f) {
  using nlohmann::json;
  json j;
  j["format"] = "fairimpute.imputer";
  j["version"] = kSerialVersion;
  j["spec"] = {{"strategy", strategy_name(f.spec.strategy)},
               {"append_indicators", f.spec.append_indicators},
               {"mice_iterations", f.spec.mice_iterations},
               {"mice_draws", f.spec.mice_draws},
               {"noise_draws", f.spec.noise_draws},
               {"control_all_groups", f.spec.control_all_groups},
               {"seed", f.spec.seed}};
  j["covariate_count"] = f.covariate_count;
  j["auxiliary_count"] = f.auxiliary_count;
  j["population_means"] = f.population_means;
  j["medians"] = f.medians;
  json cells = json::array();
  for (const auto& [key, means] : f.cell_means) {
    json m = json::array();
    for (const auto& v : means) m.push_back(v ? json(*v) : json(nullptr));
    cells.push_back({{"key", key}, {"means", m}});
  }
  j["cell_means"] = cells;
  json chains = json::array();
  for (const auto& chain : f.chains) {
    json cj = json::array();
    for (const auto& reg : chain) {
      cj.push_back({{"fallback", reg.fallback},
                    {"coefficients", reg.coefficients},
                    {"residual_std", reg.residual_std}});
    }
    chains.push_back(cj);
  }
  j["chains"] = chains;
  j["warnings"] = f.warnings;
  return j.dump(2);
}

FittedImputer fitted_imputer_from_json(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("imputer blob: ") + e.what());
  }
  if (j.value("format", "") != "fairimpute.imputer") throw SchemaError("imputer blob: wrong format tag");
  if (j.value("version", 0) != kSerialVersion) throw SchemaError("imputer blob: unsupported version");
  try {
    FittedImputer f;
    const auto& s = j.at("spec");
    f.spec.strategy = parse_strategy(s.at("strategy").get<std::string>());
    f.spec.append_indicators = s.at("append_indicators").get<bool>();
    f.spec.mice_iterations = s.at("mice_iterations").get<int>();
    f.spec.mice_draws = s.at("mice_draws").get<int>();
    f.spec.noise_draws = s.at("noise_draws").get<bool>();
    f.spec.control_all_groups = s.at("control_all_groups").get<bool>();
    f.spec.seed = s.at("seed").get<std::uint64_t>();
    f.covariate_count = j.at("covariate_count").get<std::size_t>();
    f.auxiliary_count = j.at("auxiliary_count").get<std::size_t>();
    f.population_means = j.at("population_means").get<std::vector<double>>();
    f.medians = j.at("medians").get<std::vector<double>>();
    for (const auto& cell : j.at("cell_means")) {
      std::vector<std::optional<double>> means;
      for (const auto& v : cell.at("means")) {
        means.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
      }
      f.cell_means.emplace(cell.at("key").get<std::vector<std::uint8_t>>(), std::move(means));
    }
    for (const auto& cj : j.at("chains")) {
      std::vector<ColumnRegression> chain;
      for (const auto& r : cj) {
        ColumnRegression reg;
        reg.fallback = r.at("fallback").get<bool>();
        reg.coefficients = r.at("coefficients").get<std::vector<double>>();
        reg.residual_std = r.at("residual_std").get<double>();
        chain.push_back(std::move(reg));
      }
      f.chains.push_back(std::move(chain));
    }
    f.warnings = j.at("warnings").get<std::vector<std::string>>();
    return f;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("imputer blob: ") + e.what());
  }
}

}  // namespace fairimpute
