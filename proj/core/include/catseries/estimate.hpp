#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "catseries/series.hpp"

namespace catseries {

/// Marginal frequencies over every observed position, index 0 included.
struct PiEstimate {
  Eigen::VectorXd pi_hat;
  std::size_t n = 0;  ///< number of observed values used
  /// (1 + alpha)/(1 - alpha) * pi_j (1 - pi_j); set by with_alpha().
  std::optional<Eigen::VectorXd> var_asymptotic;

  PiEstimate with_alpha(double alpha) const;
};

enum class AlphaMethod { MaximumLikelihood, LeastSquares };

std::string_view to_string(AlphaMethod m) noexcept;

struct AlphaEstimate {
  double alpha_hat = 0.0;
  AlphaMethod method = AlphaMethod::MaximumLikelihood;
  bool converged = false;
  int iterations = 0;

  /// True when the estimate is usable as an alpha: converged and in [0, 1).
  bool valid() const noexcept { return converged && alpha_hat >= 0.0 && alpha_hat < 1.0; }
};

/// Throws Error(AllMissing) when no value is observed.
PiEstimate estimate_pi(const CatSeries& series);

/// V_n(alpha) = sum_{h=1}^{n} (n - h) alpha^h, evaluated in closed form
/// except within 1e-6 of alpha = 1 or when n (1 - alpha) < 10, where the
/// direct sum is used.
double vn(double alpha, std::size_t n);

/// Exact finite-n variance of pi_hat_j under a stationary DAR(1).
double pi_hat_variance(double pi_j, double alpha, std::size_t n);
double pi_hat_covariance(double pi_j, double pi_jp, double alpha, std::size_t n);

/// Transition counts over adjacent pairs where both values are observed.
TransitionCounts observed_pair_counts(const CatSeries& series);

/// Left-hand side minus one of the likelihood equation
///   (1/n) sum_j N_jj / (alpha + (1 - alpha) pi_j) = 1.
/// Strictly decreasing in alpha when some N_jj > 0 and some pi_j < 1.
double mle_score(const Eigen::VectorXd& diagonal_counts, double transitions, const Eigen::VectorXd& pi, double alpha);

/// Root of mle_score on [0, 1 - 1e-9] by bisection to 1e-10. Without an
/// interior root the nearest boundary is returned with converged = false.
AlphaEstimate solve_alpha_mle(const Eigen::VectorXd& diagonal_counts, double transitions, const Eigen::VectorXd& pi);

/// Plug-in maximum likelihood estimate from adjacent observed pairs.
/// Throws Error(InsufficientTransitions) when no such pair exists.
AlphaEstimate estimate_alpha_mle(const CatSeries& series, const Eigen::VectorXd& pi_hat);

/// Closed-form least-squares fit of P(alpha) to an empirical transition
/// matrix, summed over states with pi_j > 0. Not clamped: values outside
/// [0, 1) come back with converged = false.
AlphaEstimate alpha_least_squares(const EmpiricalTransitions& p_hat, const Eigen::VectorXd& pi);
AlphaEstimate estimate_alpha_ls(const CatSeries& series, const Eigen::VectorXd& pi_hat);

/// Maximises sum over consecutive observed pairs (x, y) at gap h of
/// log[alpha^h 1{x=y} + (1 - alpha^h) pi_hat_y]. A 1e-4 grid seeds a
/// golden-section refinement to 1e-8.
AlphaEstimate estimate_alpha_mle_gapped(const CatSeries& series);

/// Fraction of positions (index 0 included) holding the missing sentinel.
double estimate_beta(const CatSeries& series);

/// DAR(1) log-likelihood of the observed values given (alpha, pi): the
/// first observed value contributes log pi, each later one the gap-h
/// transition probability.
double dar_log_likelihood(const CatSeries& series, double alpha, const Eigen::VectorXd& pi);

}  // namespace catseries
