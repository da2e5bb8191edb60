#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace catseries {

/// Parameter grid for the estimator simulation study. Every (pi, alpha, n)
/// combination is one cell with m independent DAR(1) replicates.
struct SimGrid {
  std::vector<Eigen::VectorXd> pis;
  std::vector<double> alphas;
  std::vector<std::size_t> ns;
  std::size_t m = 100;
  std::uint64_t seed = 20080101;

  /// pi ∈ {(1/2,1/2), (1/3,2/3), (1/3,1/3,1/3), (1/4,1/2,1/4)},
  /// alpha ∈ {0.1, 0.2, 0.5, 0.8, 0.9}, n ∈ {50, 100, 500}, m = 100.
  static SimGrid reference();

  void validate() const;
};

struct CellResult {
  std::size_t pi_index = 0;
  Eigen::VectorXd pi;
  double alpha = 0.0;
  std::size_t n = 0;
  std::size_t m = 0;
  Eigen::VectorXd mean_pi_hat;  ///< over all m replicates
  double mean_alpha1 = 0.0;     ///< over replicates with a root in [0, 1)
  std::size_t m1 = 0;
  double mean_alpha2 = 0.0;  ///< over replicates with an estimate in [0, 1)
  std::size_t m2 = 0;
};

/// Seed of replicate r in cell c (cells numbered in pi-major, then alpha,
/// then n order): derive_seed(derive_seed(master, c), r).
std::uint64_t replicate_seed(std::uint64_t master, std::size_t cell, std::size_t replicate) noexcept;

/// Runs every cell. Replicates are spread over `threads` workers (0 picks
/// the hardware concurrency); results do not depend on the thread count.
std::vector<CellResult> run_grid(const SimGrid& grid, unsigned threads = 0);

/// Layout per pi configuration: alpha, n, pi_hat, alpha1, m1, alpha2, m2.
std::string cells_csv(const std::vector<CellResult>& cells, std::size_t pi_index);
std::string cells_markdown(const std::vector<CellResult>& cells, std::size_t pi_index);

/// "(0.503;0.497)" style rendering with three decimals.
std::string format_probabilities(const Eigen::VectorXd& v);

}  // namespace catseries
