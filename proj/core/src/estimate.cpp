#include "catseries/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>
#include <vector>

#include "catseries/error.hpp"

namespace catseries {

namespace {

constexpr double kAlphaUpper = 1.0 - 1e-9;

struct GapPair {
  int gap;
  bool same;
  Code to;
  auto operator<=>(const GapPair&) const = default;
};

std::map<GapPair, double> gap_pairs(const CatSeries& series) {
  std::map<GapPair, double> pairs;
  std::ptrdiff_t prev = -1;
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series[t] == kMissing) continue;
    if (prev >= 0) {
      const auto from = series[static_cast<std::size_t>(prev)];
      pairs[{static_cast<int>(t - static_cast<std::size_t>(prev)), from == series[t], series[t]}] += 1.0;
    }
    prev = static_cast<std::ptrdiff_t>(t);
  }
  return pairs;
}

double gapped_log_likelihood(const std::map<GapPair, double>& pairs, const Eigen::VectorXd& pi, double alpha) {
  double ll = 0.0;
  for (const auto& [key, count] : pairs) {
    const double ah = std::pow(alpha, key.gap);
    const double p_to = pi(key.to - 1);
    const double prob = key.same ? ah + (1.0 - ah) * p_to : (1.0 - ah) * p_to;
    ll += count * std::log(prob);
  }
  return ll;
}

}  // namespace

std::string_view to_string(AlphaMethod m) noexcept {
  return m == AlphaMethod::MaximumLikelihood ? "MLE" : "LeastSquares";
}

PiEstimate PiEstimate::with_alpha(double alpha) const {
  PiEstimate out = *this;
  const double scale = (1.0 + alpha) / (1.0 - alpha);
  out.var_asymptotic = scale * (pi_hat.array() * (1.0 - pi_hat.array())).matrix();
  return out;
}

PiEstimate estimate_pi(const CatSeries& series) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(series.k()));
  std::size_t n = 0;
  for (const Code c : series.codes()) {
    if (c == kMissing) continue;
    counts(c - 1) += 1.0;
    ++n;
  }
  if (n == 0) throw Error(ErrorCode::AllMissing, "series has no observed values");
  return PiEstimate{counts / static_cast<double>(n), n, std::nullopt};
}

double vn(double alpha, std::size_t n) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "vn requires alpha in [0, 1)");
  if (alpha == 0.0) return 0.0;
  const double nd = static_cast<double>(n);
  // The closed form cancels catastrophically once n (1 - alpha) is small.
  if (1.0 - alpha < 1e-6 || nd * (1.0 - alpha) < 10.0) {
    double sum = 0.0, ah = 1.0;
    for (std::size_t h = 1; h <= n; ++h) {
      ah *= alpha;
      sum += static_cast<double>(n - h) * ah;
    }
    return sum;
  }
  const double one_minus = 1.0 - alpha;
  return (nd - std::pow(alpha, nd)) / one_minus - alpha * (1.0 - std::pow(alpha, nd - 1.0)) / (one_minus * one_minus) -
         nd;
}

double pi_hat_variance(double pi_j, double alpha, std::size_t n) {
  const double nd = static_cast<double>(n);
  return pi_j * (1.0 - pi_j) / nd + 2.0 / (nd * nd) * (1.0 - pi_j) * pi_j * vn(alpha, n);
}

double pi_hat_covariance(double pi_j, double pi_jp, double alpha, std::size_t n) {
  const double nd = static_cast<double>(n);
  return -2.0 / (nd * nd) * pi_j * pi_jp * vn(alpha, n);
}

TransitionCounts observed_pair_counts(const CatSeries& series) {
  const auto k = static_cast<Eigen::Index>(series.k());
  TransitionCounts tc;
  tc.counts = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i - 1] == kMissing || series[i] == kMissing) continue;
    ++tc.counts(series[i - 1] - 1, series[i] - 1);
  }
  tc.row_sums = tc.counts.rowwise().sum();
  tc.col_sums = tc.counts.colwise().sum().transpose();
  tc.total = tc.counts.sum();
  return tc;
}

double mle_score(const Eigen::VectorXd& diagonal_counts, double transitions, const Eigen::VectorXd& pi, double alpha) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < pi.size(); ++j) {
    if (diagonal_counts(j) == 0.0) continue;
    sum += diagonal_counts(j) / (alpha + (1.0 - alpha) * pi(j));
  }
  return sum / transitions - 1.0;
}

AlphaEstimate solve_alpha_mle(const Eigen::VectorXd& diagonal_counts, double transitions, const Eigen::VectorXd& pi) {
  AlphaEstimate est;
  est.method = AlphaMethod::MaximumLikelihood;
  double lo = 0.0, hi = kAlphaUpper;
  const double f_lo = mle_score(diagonal_counts, transitions, pi, lo);
  const double f_hi = mle_score(diagonal_counts, transitions, pi, hi);
  if (f_lo <= 0.0) {
    est.alpha_hat = 0.0;
    est.converged = f_lo == 0.0 && f_hi < 0.0;
    return est;
  }
  if (f_hi >= 0.0) {
    est.alpha_hat = hi;
    return est;
  }
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (mle_score(diagonal_counts, transitions, pi, mid) > 0.0 ? lo : hi) = mid;
    ++est.iterations;
  }
  est.alpha_hat = 0.5 * (lo + hi);
  est.converged = true;
  return est;
}

AlphaEstimate estimate_alpha_mle(const CatSeries& series, const Eigen::VectorXd& pi_hat) {
  const auto tc = observed_pair_counts(series);
  if (tc.total == 0) throw Error(ErrorCode::InsufficientTransitions, "no adjacent observed pair");
  if (pi_hat.size() != tc.counts.rows()) throw Error(ErrorCode::InvalidArgument, "pi_hat has the wrong length");
  for (Eigen::Index j = 0; j < pi_hat.size(); ++j) {
    if (tc.counts(j, j) > 0 && !(pi_hat(j) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "visited state with zero pi_hat");
    }
  }
  const Eigen::VectorXd diag = tc.counts.diagonal().cast<double>();
  return solve_alpha_mle(diag, static_cast<double>(tc.total), pi_hat);
}

AlphaEstimate alpha_least_squares(const EmpiricalTransitions& p_hat, const Eigen::VectorXd& pi) {
  const auto k = pi.size();
  double numerator = 0.0, sum_sq = 0.0, sum_comp_sq = 0.0;
  int support = 0;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (!(pi(j) > 0.0)) continue;
    if (!p_hat.row_defined[static_cast<std::size_t>(j)]) {
      throw Error(ErrorCode::UndefinedTransitionRow, "state " + std::to_string(j + 1) + " is never left");
    }
    ++support;
    sum_sq += pi(j) * pi(j);
    sum_comp_sq += (1.0 - pi(j)) * (1.0 - pi(j));
    numerator += (1.0 - pi(j)) * (p_hat.p(j, j) - pi(j));
    for (Eigen::Index jp = 0; jp < k; ++jp) {
      if (jp == j || !(pi(jp) > 0.0)) continue;
      numerator -= pi(jp) * (p_hat.p(j, jp) - pi(jp));
    }
  }
  const double denominator = (support - 1) * sum_sq + sum_comp_sq;
  AlphaEstimate est;
  est.method = AlphaMethod::LeastSquares;
  if (!(denominator > 0.0)) {
    est.alpha_hat = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  est.alpha_hat = numerator / denominator;
  est.converged = est.alpha_hat >= 0.0 && est.alpha_hat < 1.0;
  return est;
}

AlphaEstimate estimate_alpha_ls(const CatSeries& series, const Eigen::VectorXd& pi_hat) {
  return alpha_least_squares(empirical_transition_matrix(observed_pair_counts(series)), pi_hat);
}

AlphaEstimate estimate_alpha_mle_gapped(const CatSeries& series) {
  const auto pairs = gap_pairs(series);
  if (pairs.empty()) throw Error(ErrorCode::InsufficientTransitions, "no pair of observed values");
  const Eigen::VectorXd pi = estimate_pi(series).pi_hat;
  const auto ll = [&](double a) { return gapped_log_likelihood(pairs, pi, a); };

  AlphaEstimate est;
  est.method = AlphaMethod::MaximumLikelihood;

  constexpr int kGrid = 10000;
  const double step = kAlphaUpper / kGrid;
  int best = 0;
  double best_ll = ll(0.0);
  for (int i = 1; i <= kGrid; ++i) {
    const double v = ll(i * step);
    if (v > best_ll) {
      best_ll = v;
      best = i;
    }
  }
  double lo = std::max(0, best - 1) * step;
  double hi = std::min(kGrid, best + 1) * step;

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = ll(x1), f2 = ll(x2);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = ll(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = ll(x1);
    }
    ++est.iterations;
  }
  double a = 0.5 * (lo + hi);
  // Keep exact boundary values when they beat the refined interior point.
  if (best == 0 && ll(0.0) >= ll(a)) a = 0.0;
  if (best == kGrid && ll(kAlphaUpper) >= ll(a)) a = kAlphaUpper;
  est.alpha_hat = a;
  est.converged = a > 0.0 && a < kAlphaUpper;
  return est;
}

double estimate_beta(const CatSeries& series) {
  return static_cast<double>(series.missing_count()) / static_cast<double>(series.size());
}

double dar_log_likelihood(const CatSeries& series, double alpha, const Eigen::VectorXd& pi) {
  double ll = 0.0;
  bool first = true;
  for (const Code c : series.codes()) {
    if (c == kMissing) continue;
    if (first) ll += std::log(pi(c - 1));
    first = false;
  }
  if (first) throw Error(ErrorCode::AllMissing, "series has no observed values");
  return ll + gapped_log_likelihood(gap_pairs(series), pi, alpha);
}

}  // namespace catseries
