#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "catseries/series.hpp"

namespace catseries {

enum class GlmFamily { MultinomialLogit, ProportionalOdds };

std::string_view to_string(GlmFamily f) noexcept;

/// One response with its lagged-indicator covariates: an intercept followed,
/// for each lag 1..l, by k-1 dummies for lagged states 2..k (state 1 is the
/// reference level).
struct DesignRow {
  std::size_t t = 0;
  Code response = 1;
  Eigen::VectorXd covariates;
};

struct Design {
  std::size_t k = 0;
  int lag = 0;
  std::vector<DesignRow> rows;

  std::size_t n_used() const noexcept { return rows.size(); }
};

/// Rows for every t ≥ require_lag whose response and lags 1..require_lag are
/// all observed. require_lag defaults to lag; a larger value restricts the
/// row set to the one usable by a larger model. Throws Error(NoUsableRows).
Design build_design(const CatSeries& series, int lag, std::optional<int> require_lag = std::nullopt);

/// Log partial likelihood with its gradient and Hessian in the parameters.
struct Objective {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// Multinomial logit with the last category as reference. x is n x p,
/// y holds 0-based categories in 0..m-1, theta stacks beta_0..beta_{m-2}
/// (each of length p).
Objective multinomial_objective(const Eigen::MatrixXd& x, std::span<const int> y, int m, const Eigen::VectorXd& theta);

/// Cumulative logit P(Y ≤ j) = 1 / (1 + exp(-(theta_j - x'beta))). x excludes
/// the intercept; theta stacks the m-1 cutpoints then the slopes.
Objective ordinal_objective(const Eigen::MatrixXd& x, std::span<const int> y, int m, const Eigen::VectorXd& theta);

struct GlmFit {
  GlmFamily family = GlmFamily::MultinomialLogit;
  int lag = 0;
  /// Response codes present in the rows; the fit is over these only.
  std::vector<Code> categories;
  /// Indices into DesignRow::covariates retained after dropping constant or
  /// aliased columns.
  std::vector<int> columns;
  /// Multinomial: (m-1) x p coefficients, row j for categories[j] against
  /// categories.back().
  Eigen::MatrixXd coefficients;
  /// Proportional odds: increasing cutpoints and shared slopes on the
  /// retained non-intercept columns.
  Eigen::VectorXd cutpoints;
  Eigen::VectorXd slopes;
  double log_pl = 0.0;
  double aic = 0.0;
  std::size_t n_params = 0;
  std::size_t n_used = 0;
  int iterations = 0;
  double gradient_norm = 0.0;  ///< max-norm of the gradient at the optimum
  std::vector<std::string> notes;

  /// Fitted probabilities over `categories` for one covariate vector.
  Eigen::VectorXd probabilities(const Eigen::VectorXd& covariates) const;
};

/// Newton-Raphson with step halving. Throws Error(Separation) once any
/// coefficient exceeds 30 in magnitude and Error(SingularHessian) when the
/// Newton system cannot be solved.
GlmFit fit_multinomial(const Design& design);
GlmFit fit_proportional_odds(const Design& design);
GlmFit fit_glm(const Design& design, GlmFamily family);

struct AicRow {
  int lag = 0;
  std::size_t n_used = 0;
  std::optional<std::size_t> n_params;
  std::optional<double> log_pl;
  std::optional<double> aic;
  bool best = false;
  std::string failure;  ///< reason when the fit failed
};

struct AicTable {
  GlmFamily family = GlmFamily::MultinomialLogit;
  bool common_rows = false;
  std::vector<AicRow> rows;

  const AicRow* best() const noexcept;
};

/// Fits every requested lag. With common_rows each lag is fitted on the
/// rows usable by the largest lag, so AIC values share one sample.
AicTable aic_table(const CatSeries& series, GlmFamily family, std::span<const int> lags, bool common_rows = false);

std::string aic_table_csv(const AicTable& table);
std::string aic_table_text(const AicTable& table);
std::string aic_table_markdown(const AicTable& table);

}  // namespace catseries
