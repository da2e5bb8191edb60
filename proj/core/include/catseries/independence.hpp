#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "catseries/series.hpp"

namespace catseries {

/// Outcome of one test of H0: alpha = 0.
struct TestReport {
  std::string name;
  double statistic = 0.0;
  std::optional<double> p_value;
  double level = 0.05;
  bool reject = false;
  std::optional<double> power;
  /// Acceptance band for the statistic, when the test is band based.
  std::optional<std::pair<double, double>> band;
  std::vector<std::string> notes;
};

/// Maximal runs of identical values over every position of the series.
struct RunsSummary {
  /// by_state_length[j][i] = number of runs of state j+1 with length i.
  std::vector<std::vector<int>> by_state_length;
  std::vector<int> by_state;
  int total_runs = 0;
  int longest = 0;
  std::size_t length = 0;  ///< number of values scanned
};

/// Throws Error(MissingValuePresent) on gaps.
RunsSummary runs_summary(const CatSeries& series);

/// Pearson statistic on the k x k transition table with expected counts
/// N_{j.} N_{.j'} / (n - 1), referred to chi-square with (k-1)^2 degrees
/// of freedom. Throws Error(UnvisitedState) when a row or column is empty.
TestReport chi_square_test(const CatSeries& series, double level);

/// Normal approximation to the total number of runs under iid(pi), with a
/// two-sided p-value. Throws Error(DegenerateDistribution) when some
/// pi_j = 1.
TestReport runs_count_test(const CatSeries& series, const Eigen::VectorXd& pi, double level,
                           bool pi_estimated = false);

/// Asymptotic null variance per observation of the run count:
/// sum pi^2 + 2 sum pi^3 - 3 (sum pi^2)^2.
double runs_variance_rate(const Eigen::VectorXd& pi);

/// ρ = max_j P_jj and π_ρ = total mass of the states attaining it, for a
/// DAR(1) with persistence alpha.
struct LongestRunParams {
  double rho;
  double pi_rho;
};
LongestRunParams longest_run_params(const Eigen::VectorXd& pi, double alpha);

/// P(L_n - 1 < z) ≈ exp(-n (1 - ρ) π_ρ ρ^z), clamped to [0, 1].
double longest_run_cdf(const LongestRunParams& params, std::size_t n, double z);

/// Two-sided band for L_n - 1 at confidence 1 - level.
std::pair<double, double> longest_run_band(const LongestRunParams& params, std::size_t n, double level);

/// How an observed longest run is compared against the null law.
enum class LongestRunRule {
  /// Tail probabilities of the null law evaluated at the integers; each
  /// tail has size at most level / 2.
  IntegerTails,
  /// Reject when L_n - 1 falls outside the real-valued band.
  Band,
};

TestReport longest_run_test(const CatSeries& series, const Eigen::VectorXd& pi, double level,
                            LongestRunRule rule = LongestRunRule::IntegerTails);

/// Power of the band test against a DAR(1) with persistence alpha1.
double longest_run_power(const Eigen::VectorXd& pi, double alpha1, std::size_t n, double level);

}  // namespace catseries
