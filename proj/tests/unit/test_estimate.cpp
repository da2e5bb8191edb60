#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "catseries/dar.hpp"
#include "catseries/error.hpp"
#include "catseries/estimate.hpp"
#include "oracles.hpp"

using namespace catseries;

namespace {

CatSeries make(int k, std::vector<Code> codes) { return CatSeries(StateSpace::numbered(static_cast<std::size_t>(k)), std::move(codes)); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(EstimatePi, CountsEveryObservedPosition) {
  const auto est = estimate_pi(make(3, {1, 1, 2, 3, 1, kMissing}));
  EXPECT_EQ(est.n, 5u);
  EXPECT_DOUBLE_EQ(est.pi_hat(0), 0.6);
  EXPECT_DOUBLE_EQ(est.pi_hat(1), 0.2);
  EXPECT_DOUBLE_EQ(est.pi_hat(2), 0.2);
  EXPECT_THROW(estimate_pi(make(2, {kMissing, kMissing})), Error);

  const auto with = est.with_alpha(0.5);
  ASSERT_TRUE(with.var_asymptotic.has_value());
  EXPECT_NEAR((*with.var_asymptotic)(0), 3.0 * 0.6 * 0.4, 1e-15);
}

TEST(Vn, MatchesDirectSum) {
  for (double a : {0.0, 0.1, 0.3, 0.5, 0.8, 0.9, 0.99, 0.999999, 0.9999999}) {
    for (std::size_t n : {1u, 2u, 3u, 10u, 50u, 100u, 500u}) {
      const double direct = oracle::vn_direct(a, n);
      EXPECT_NEAR(vn(a, n), direct, 1e-9 * std::max(1.0, std::abs(direct))) << "a=" << a << " n=" << n;
    }
  }
  EXPECT_DOUBLE_EQ(vn(0.5, 3), 1.25);
  EXPECT_NEAR(vn(0.9, 50), 360.46383976865894, 1e-9);
}

TEST(PiHatVariance, IidAndAsymptoticLimits) {
  EXPECT_NEAR(pi_hat_variance(0.3, 0.0, 100), 0.3 * 0.7 / 100.0, 1e-15);
  EXPECT_NEAR(10000.0 * pi_hat_variance(0.5, 0.5, 10000), 0.7499, 1e-4);
  EXPECT_NEAR(100000.0 * pi_hat_variance(0.5, 0.5, 100000), 0.75, 1e-4);
  EXPECT_DOUBLE_EQ(pi_hat_covariance(0.3, 0.2, 0.0, 100), 0.0);
  EXPECT_NEAR(pi_hat_covariance(0.3, 0.2, 0.5, 50), -2.0 / 2500.0 * 0.06 * vn(0.5, 50), 1e-15);
  EXPECT_NEAR(100000.0 * pi_hat_covariance(0.3, 0.2, 0.5, 100000), -2.0 * 0.06, 1e-4);
}

TEST(MleScore, DecreasingInAlpha) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 4);
    const auto pi = oracle::random_simplex(gen, k);
    Eigen::VectorXd diag(k);
    for (int j = 0; j < k; ++j) diag(j) = static_cast<double>(gen() % 20);
    diag(0) += 1.0;
    const double total = diag.sum() + static_cast<double>(gen() % 40);
    double prev = mle_score(diag, total, pi, 0.0);
    for (int i = 1; i < 100; ++i) {
      const double cur = mle_score(diag, total, pi, i / 100.0);
      EXPECT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(SolveAlphaMle, SatisfiesLikelihoodEquation) {
  std::mt19937_64 gen(11);
  int converged = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto pi = oracle::random_simplex(gen, 3);
    const double alpha = std::uniform_real_distribution<double>(0.0, 0.95)(gen);
    const auto s = simulate(DarModel(alpha, pi), 200, gen());
    const auto pi_hat = estimate_pi(s).pi_hat;
    const auto est = estimate_alpha_mle(s, pi_hat);
    if (!est.converged) continue;
    ++converged;
    const auto counts = transition_counts(s);
    double lhs = 0.0;
    for (int j = 0; j < 3; ++j)
      lhs += counts.counts(j, j) / (est.alpha_hat + (1.0 - est.alpha_hat) * pi_hat(j));
    EXPECT_NEAR(lhs / counts.total, 1.0, 1e-8);
  }
  EXPECT_GT(converged, 150);
}

TEST(SolveAlphaMle, AlternatingSeriesHasNoInteriorRoot) {
  std::vector<Code> x;
  for (int i = 0; i < 40; ++i) x.push_back(1 + i % 2);
  const auto s = make(2, x);
  const auto est = estimate_alpha_mle(s, estimate_pi(s).pi_hat);
  EXPECT_FALSE(est.converged);
  EXPECT_FALSE(est.valid());
  EXPECT_DOUBLE_EQ(est.alpha_hat, 0.0);
}

TEST(SolveAlphaMle, RequiresATransition) {
  const auto s = make(2, {1, kMissing, 2, kMissing});
  EXPECT_THROW(estimate_alpha_mle(s, vec({0.5, 0.5})), Error);
}

TEST(AlphaLeastSquares, RecoversExactMatrices) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 0.999);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 5);
    const double alpha = u(gen);
    const auto pi = oracle::random_simplex(gen, k);
    EmpiricalTransitions p;
    p.p = oracle::dar_matrix(alpha, pi);
    p.row_defined.assign(static_cast<std::size_t>(k), true);
    const auto est = alpha_least_squares(p, pi);
    EXPECT_NEAR(est.alpha_hat, alpha, 1e-12);
    EXPECT_TRUE(est.converged);
  }
}

TEST(AlphaLeastSquares, UndefinedRowIsAnError) {
  const auto s = make(3, {1, 1, 2, 1, 2, 3});
  EXPECT_THROW(estimate_alpha_ls(s, estimate_pi(s).pi_hat), Error);
}

TEST(AlphaLeastSquares, UnclampedOutsideUnitInterval) {
  std::vector<Code> x;
  for (int i = 0; i < 40; ++i) x.push_back(1 + i % 2);
  const auto s = make(2, x);
  const auto est = estimate_alpha_ls(s, estimate_pi(s).pi_hat);
  EXPECT_LT(est.alpha_hat, 0.0);
  EXPECT_FALSE(est.valid());
}

TEST(Estimators, PermutationEquivariant) {
  std::mt19937_64 gen(8);
  const auto s = simulate(DarModel(0.5, vec({0.2, 0.3, 0.5})), 300, 77);
  const std::vector<int> perm{3, 1, 2};
  std::vector<Code> relabelled;
  for (Code c : s.codes()) relabelled.push_back(perm[static_cast<std::size_t>(c - 1)]);
  const auto r = make(3, relabelled);
  const auto pa = estimate_pi(s).pi_hat;
  const auto pb = estimate_pi(r).pi_hat;
  for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(pa(j), pb(perm[static_cast<std::size_t>(j)] - 1));
  EXPECT_NEAR(estimate_alpha_mle(s, pa).alpha_hat, estimate_alpha_mle(r, pb).alpha_hat, 1e-10);
  EXPECT_NEAR(estimate_alpha_ls(s, pa).alpha_hat, estimate_alpha_ls(r, pb).alpha_hat, 1e-12);
}

TEST(Estimators, ConsistentForLargeSamples) {
  const auto pi = vec({0.25, 0.5, 0.25});
  for (double alpha : {0.1, 0.5, 0.9}) {
    const auto s = simulate(DarModel(alpha, pi), 20000, 100);
    const auto pi_hat = estimate_pi(s).pi_hat;
    EXPECT_LT((pi_hat - pi).cwiseAbs().maxCoeff(), 0.03);
    EXPECT_NEAR(estimate_alpha_mle(s, pi_hat).alpha_hat, alpha, 0.02);
    EXPECT_NEAR(estimate_alpha_ls(s, pi_hat).alpha_hat, alpha, 0.03);
  }
}

TEST(GappedMle, ReducesToMleWithoutGaps) {
  std::mt19937_64 gen(44);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = std::uniform_real_distribution<double>(0.1, 0.9)(gen);
    const auto s = simulate(DarModel(alpha, vec({0.3, 0.3, 0.4})), 300, gen());
    const auto plain = estimate_alpha_mle(s, estimate_pi(s).pi_hat);
    const auto gapped = estimate_alpha_mle_gapped(s);
    if (!plain.converged) continue;
    EXPECT_NEAR(gapped.alpha_hat, plain.alpha_hat, 1e-6);
  }
}

TEST(GappedMle, ConsistentUnderThinning) {
  const MissingDarModel model(DarModel(0.7, vec({0.5, 0.5})), 0.3);
  const auto s = simulate_with_missing(model, 20000, 12);
  EXPECT_NEAR(estimate_alpha_mle_gapped(s).alpha_hat, 0.7, 0.03);
  EXPECT_NEAR(estimate_beta(s), 0.3, 0.02);
}

TEST(EstimateBeta, FractionMissing) {
  EXPECT_DOUBLE_EQ(estimate_beta(make(2, {1, kMissing, 2, kMissing})), 0.5);
  EXPECT_DOUBLE_EQ(estimate_beta(make(2, {1, 2})), 0.0);
}

TEST(DarLogLikelihood, HandComputed) {
  const auto pi = vec({0.4, 0.6});
  const double a = 0.5;
  const auto s = make(2, {1, 1, kMissing, 2});
  const double p11 = a + (1 - a) * 0.4;
  const double a2 = a * a;
  const double expected = std::log(0.4) + std::log(p11) + std::log((1 - a2) * 0.6);
  EXPECT_NEAR(dar_log_likelihood(s, a, pi), expected, 1e-14);
}

TEST(PiHatClt, VarianceMatchesFiniteSampleFormula) {
  const auto pi = vec({0.5, 0.5});
  for (double alpha : {0.0, 0.5}) {
    const std::size_t n = 1000, m = 400;
    std::vector<double> v;
    for (std::size_t r = 0; r < m; ++r) v.push_back(estimate_pi(simulate(DarModel(alpha, pi), n, 1000 + r)).pi_hat(0));
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= m - 1;
    EXPECT_NEAR(var / pi_hat_variance(0.5, alpha, n + 1), 1.0, 0.2) << alpha;
  }
}
