#include "catseries/independence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>

#include "catseries/error.hpp"

namespace catseries {

namespace {

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidArgument, "level must lie in (0, 1)");
}

void check_distribution(const Eigen::VectorXd& pi, std::size_t k) {
  if (static_cast<std::size_t>(pi.size()) != k) throw Error(ErrorCode::InvalidArgument, "pi has the wrong length");
  if ((pi.array() < 0.0).any() || std::abs(pi.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "pi is not a probability vector");
  }
  if ((pi.array() >= 1.0).any()) {
    throw Error(ErrorCode::DegenerateDistribution, "pi puts all mass on one state");
  }
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

RunsSummary runs_summary(const CatSeries& series) {
  if (series.has_missing()) throw Error(ErrorCode::MissingValuePresent, "runs need a complete series");
  const auto k = series.k();
  const auto n = series.size();
  RunsSummary rs;
  rs.length = n;
  rs.by_state_length.assign(k, std::vector<int>(n + 1, 0));
  rs.by_state.assign(k, 0);
  std::size_t start = 0;
  for (std::size_t t = 1; t <= n; ++t) {
    if (t == n || series[t] != series[start]) {
      const auto len = t - start;
      const auto j = static_cast<std::size_t>(series[start] - 1);
      ++rs.by_state_length[j][len];
      ++rs.by_state[j];
      ++rs.total_runs;
      rs.longest = std::max(rs.longest, static_cast<int>(len));
      start = t;
    }
  }
  return rs;
}

TestReport chi_square_test(const CatSeries& series, double level) {
  check_level(level);
  const auto tc = transition_counts(series);
  const auto k = tc.counts.rows();
  for (Eigen::Index j = 0; j < k; ++j) {
    if (tc.row_sums(j) == 0 || tc.col_sums(j) == 0) {
      throw Error(ErrorCode::UnvisitedState, "state " + std::to_string(j + 1) + " has an empty row or column");
    }
  }
  if (tc.total < 2) throw Error(ErrorCode::InsufficientTransitions, "need at least two transitions");
  const double denom = static_cast<double>(tc.total - 1);
  TestReport rep;
  rep.name = "chi-square Markov";
  rep.level = level;
  double c2 = 0.0;
  int sparse = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index jp = 0; jp < k; ++jp) {
      const double expected = static_cast<double>(tc.row_sums(j)) * static_cast<double>(tc.col_sums(jp)) / denom;
      const double diff = tc.counts(j, jp) - expected;
      c2 += diff * diff / expected;
      const double p_hat = static_cast<double>(tc.counts(j, jp)) / static_cast<double>(tc.row_sums(j));
      if (p_hat < 0.05) ++sparse;
    }
  }
  const double df = static_cast<double>((k - 1) * (k - 1));
  rep.statistic = c2;
  rep.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), c2));
  rep.reject = *rep.p_value < level;
  rep.notes.push_back("df=" + std::to_string(static_cast<int>(df)));
  if (sparse > 0) {
    rep.notes.push_back(std::to_string(sparse) + " transition cell(s) with estimated probability below 5%;"
                        " the chi-square approximation may be poor");
  }
  return rep;
}

double runs_variance_rate(const Eigen::VectorXd& pi) {
  const double s2 = pi.array().square().sum();
  const double s3 = pi.array().cube().sum();
  return s2 + 2.0 * s3 - 3.0 * s2 * s2;
}

TestReport runs_count_test(const CatSeries& series, const Eigen::VectorXd& pi, double level, bool pi_estimated) {
  check_level(level);
  check_distribution(pi, series.k());
  const auto rs = runs_summary(series);
  const double n = static_cast<double>(rs.length);
  TestReport rep;
  rep.name = "runs count";
  rep.level = level;
  double z;
  if (pi.size() == 2) {
    const double pq = pi(0) * pi(1);
    z = (rs.total_runs - 2.0 * n * pq) / (2.0 * std::sqrt(n * pq * (1.0 - 3.0 * pq)));
  } else {
    const double s2 = pi.array().square().sum();
    const double var = runs_variance_rate(pi);
    if (!(var > 0.0)) throw Error(ErrorCode::DegenerateDistribution, "null variance of the run count is zero");
    z = (rs.total_runs - n * (1.0 - s2)) / std::sqrt(n * var);
  }
  rep.statistic = z;
  rep.p_value = normal_two_sided(z);
  rep.reject = *rep.p_value < level;
  rep.notes.push_back("R_n=" + std::to_string(rs.total_runs));
  if (pi_estimated) rep.notes.push_back("pi estimated from the same series");
  return rep;
}

LongestRunParams longest_run_params(const Eigen::VectorXd& pi, double alpha) {
  LongestRunParams p{0.0, 0.0};
  for (Eigen::Index j = 0; j < pi.size(); ++j) {
    if (!(pi(j) > 0.0)) continue;
    p.rho = std::max(p.rho, alpha + (1.0 - alpha) * pi(j));
  }
  for (Eigen::Index j = 0; j < pi.size(); ++j) {
    if (pi(j) > 0.0 && std::abs(alpha + (1.0 - alpha) * pi(j) - p.rho) <= 1e-12) p.pi_rho += pi(j);
  }
  return p;
}

double longest_run_cdf(const LongestRunParams& params, std::size_t n, double z) {
  const double c = static_cast<double>(n) * (1.0 - params.rho) * params.pi_rho;
  return std::clamp(std::exp(-c * std::pow(params.rho, z)), 0.0, 1.0);
}

std::pair<double, double> longest_run_band(const LongestRunParams& params, std::size_t n, double level) {
  check_level(level);
  if (!(params.rho > 0.0 && params.rho < 1.0)) {
    throw Error(ErrorCode::DegenerateDistribution, "rho must lie in (0, 1)");
  }
  const double c = static_cast<double>(n) * (1.0 - params.rho) * params.pi_rho;
  const double log_rho = std::log(params.rho);
  const double lower = std::log(-std::log(level / 2.0) / c) / log_rho;
  const double upper = std::log(-std::log(1.0 - level / 2.0) / c) / log_rho;
  return {lower, upper};
}

TestReport longest_run_test(const CatSeries& series, const Eigen::VectorXd& pi, double level, LongestRunRule rule) {
  check_level(level);
  check_distribution(pi, series.k());
  const auto rs = runs_summary(series);
  const auto params = longest_run_params(pi, 0.0);
  const auto band = longest_run_band(params, rs.length, level);
  const double shifted = rs.longest - 1.0;

  TestReport rep;
  rep.name = "longest run";
  rep.level = level;
  rep.statistic = shifted;
  rep.band = band;

  // P(L~ <= obs) and P(L~ >= obs) under H0, read off at integer thresholds.
  const double p_low = longest_run_cdf(params, rs.length, shifted + 1.0);
  const double p_high = 1.0 - longest_run_cdf(params, rs.length, shifted);
  rep.p_value = std::min(1.0, 2.0 * std::min(p_low, p_high));

  const bool outside_band = shifted < band.first || shifted > band.second;
  rep.reject = rule == LongestRunRule::Band ? outside_band : (p_low <= level / 2.0 || p_high <= level / 2.0);
  rep.notes.push_back("L_n=" + std::to_string(rs.longest) + ", band for L_n-1 = [" + fmt_double(band.first) + ", " +
                      fmt_double(band.second) + "]");
  rep.notes.push_back("rho0=" + fmt_double(params.rho) + ", pi_rho0=" + fmt_double(params.pi_rho));
  return rep;
}

double longest_run_power(const Eigen::VectorXd& pi, double alpha1, std::size_t n, double level) {
  if (!(alpha1 >= 0.0 && alpha1 < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha1 must lie in [0, 1)");
  if ((pi.array() >= 1.0).any()) throw Error(ErrorCode::DegenerateDistribution, "pi puts all mass on one state");
  const auto null_params = longest_run_params(pi, 0.0);
  const auto band = longest_run_band(null_params, n, level);
  const auto alt = longest_run_params(pi, alpha1);
  const double power = 1.0 + longest_run_cdf(alt, n, band.first) - longest_run_cdf(alt, n, band.second);
  return std::clamp(power, 0.0, 1.0);
}

}  // namespace catseries
