#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "catseries/series.hpp"
#include "catseries/state_space.hpp"

namespace catseries {

/// DAR(1) process X_t = V_t X_{t-1} + (1 - V_t) Z_t with V_t ~ Bernoulli(alpha)
/// and Z_t ~ pi. Equivalent to a Markov chain with P = alpha I + (1 - alpha) Q,
/// where every row of Q equals pi.
class DarModel {
 public:
  /// Throws Error(InvalidArgument) unless alpha ∈ [0, 1), pi ≥ 0 sums to 1
  /// within 1e-12 and pi has one entry per state.
  DarModel(double alpha, Eigen::VectorXd pi, StateSpace space);
  DarModel(double alpha, Eigen::VectorXd pi);

  double alpha() const noexcept { return alpha_; }
  const Eigen::VectorXd& pi() const noexcept { return pi_; }
  const StateSpace& space() const noexcept { return space_; }
  std::size_t k() const noexcept { return space_.size(); }

 private:
  double alpha_;
  Eigen::VectorXd pi_;
  StateSpace space_;
};

/// DAR(1) observed through independent thinning: each X_t is replaced by
/// the missing sentinel with probability beta.
class MissingDarModel {
 public:
  MissingDarModel(DarModel base, double beta);

  const DarModel& base() const noexcept { return base_; }
  double beta() const noexcept { return beta_; }

 private:
  DarModel base_;
  double beta_;
};

Eigen::MatrixXd transition_matrix(const DarModel& model);

/// P^h = alpha^h I + (1 - alpha^h) Q for h ≥ 1.
Eigen::MatrixXd transition_matrix_power(const DarModel& model, int h);

/// ρ(h) = alpha^h.
double autocorrelation(const DarModel& model, int h);

/// One seeded generator per call. Every step draws V_t then Z_t, Z_t
/// always consumed, so trajectories do not depend on the realised V_t.
CatSeries simulate(const DarModel& model, std::size_t n, std::uint64_t seed);

/// Same latent path as simulate(base, n, seed); the missingness mask is
/// drawn afterwards from the same generator.
CatSeries simulate_with_missing(const MissingDarModel& model, std::size_t n, std::uint64_t seed);

/// Transition matrix of the observed chain on {-1} ∪ E. Index 0 is the
/// missing state, index j the state with code j.
Eigen::MatrixXd augmented_transition_matrix(const MissingDarModel& model);

}  // namespace catseries
