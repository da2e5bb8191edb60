#include <random>

#include <gtest/gtest.h>

#include "catseries/dar.hpp"
#include "catseries/error.hpp"
#include "catseries/independence.hpp"
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

CatSeries chi_fixture() {
  std::vector<Code> x;
  for (int i = 0; i < 41; ++i) x.push_back((i / 2) % 2 + 1);
  return make(2, x);
}

}  // namespace

TEST(RunsSummary, HandExample) {
  const auto rs = runs_summary(make(3, {1, 2, 2, 3, 1}));
  EXPECT_EQ(rs.total_runs, 4);
  EXPECT_EQ(rs.longest, 2);
  EXPECT_EQ(rs.by_state[0], 2);
  EXPECT_EQ(rs.by_state_length[1][2], 1);
  EXPECT_EQ(rs.length, 5u);
  EXPECT_THROW(runs_summary(make(2, {1, kMissing, 2})), Error);
}

TEST(RunsSummary, MatchesNaiveScanner) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 4);
    const int len = 2 + static_cast<int>(gen() % 60);
    const int sticky = static_cast<int>(gen() % 4);
    std::vector<Code> x{1 + static_cast<int>(gen() % k)};
    while (static_cast<int>(x.size()) < len) {
      x.push_back(static_cast<int>(gen() % 4) < sticky ? x.back() : 1 + static_cast<int>(gen() % k));
    }
    const auto rs = runs_summary(make(k, x));
    const auto naive = oracle::naive_runs(x, k);
    ASSERT_EQ(rs.total_runs, naive.total);
    ASSERT_EQ(rs.longest, naive.longest);
    ASSERT_EQ(rs.by_state_length, naive.by_state_length);
    int covered = 0;
    for (int j = 0; j < k; ++j)
      for (int l = 1; l <= len; ++l) covered += l * rs.by_state_length[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
    ASSERT_EQ(covered, len);
  }
}

TEST(ChiSquare, FrozenFixture) {
  const auto rep = chi_square_test(chi_fixture(), 0.05);
  EXPECT_NEAR(rep.statistic, 1.0 / 39.0, 1e-14);
  ASSERT_TRUE(rep.p_value.has_value());
  EXPECT_GT(*rep.p_value, 0.8);
  EXPECT_FALSE(rep.reject);
}

TEST(ChiSquare, RelabelInvariant) {
  const auto s = simulate(DarModel(0.3, vec({0.2, 0.3, 0.5})), 200, 9);
  std::vector<Code> y;
  for (Code c : s.codes()) y.push_back(4 - c);
  EXPECT_NEAR(chi_square_test(s, 0.05).statistic, chi_square_test(make(3, y), 0.05).statistic, 1e-10);
}

TEST(ChiSquare, UnvisitedStateAndSparseNote) {
  EXPECT_THROW(chi_square_test(make(3, {1, 2, 1, 2, 1}), 0.05), Error);
  const auto rep = chi_square_test(make(2, {1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2}), 0.05);
  EXPECT_FALSE(rep.notes.empty());
  EXPECT_THROW(chi_square_test(chi_fixture(), 1.0), Error);
}

TEST(ChiSquare, DetectsStrongDependence) {
  const auto s = simulate(DarModel(0.8, vec({0.5, 0.5})), 200, 4);
  EXPECT_TRUE(chi_square_test(s, 0.05).reject);
}

TEST(RunsCount, VarianceRateIdentities) {
  EXPECT_NEAR(runs_variance_rate(vec({0.5, 0.5})), 0.25, 1e-15);
  // k = 2 reduces to 4 pq (1 - 3 pq).
  for (double p : {0.1, 0.3, 0.5}) {
    const double pq = p * (1 - p);
    EXPECT_NEAR(runs_variance_rate(vec({p, 1 - p})), 4 * pq * (1 - 3 * pq), 1e-14);
  }
  EXPECT_NEAR(runs_variance_rate(vec({1.0 / 3, 1.0 / 3, 1.0 / 3})), 2.0 / 9.0, 1e-14);
}

TEST(RunsCount, AlternatingSeriesRejects) {
  std::vector<Code> x;
  for (int i = 0; i < 60; ++i) x.push_back(1 + i % 2);
  const auto rep = runs_count_test(make(2, x), vec({0.5, 0.5}), 0.05);
  EXPECT_GT(rep.statistic, 0.0);
  EXPECT_TRUE(rep.reject);
}

TEST(RunsCount, DegenerateOnlyForPointMass) {
  EXPECT_THROW(runs_count_test(make(2, {1, 1, 1}), vec({1.0, 0.0}), 0.05), Error);
  try {
    runs_count_test(make(2, {1, 1, 1}), vec({1.0, 0.0}), 0.05);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateDistribution);
  }
  EXPECT_NO_THROW(runs_count_test(make(3, {1, 2, 1, 2}), vec({0.5, 0.5, 0.0}), 0.05));
}

TEST(LongestRun, FrozenBand) {
  const auto params = longest_run_params(vec({0.5, 0.25, 0.25}), 0.0);
  EXPECT_DOUBLE_EQ(params.rho, 0.5);
  EXPECT_DOUBLE_EQ(params.pi_rho, 0.5);
  const auto band = longest_run_band(params, 52, 0.05);
  EXPECT_NEAR(band.first, 1.8172570729938418, 1e-12);
  EXPECT_NEAR(band.second, 9.004143406273231, 1e-12);
  EXPECT_NEAR(longest_run_cdf(params, 52, band.first), 0.025, 1e-12);
  EXPECT_NEAR(longest_run_cdf(params, 52, band.second), 0.975, 1e-12);
}

TEST(LongestRun, TiedMaximaPoolMass) {
  const auto params = longest_run_params(vec({0.4, 0.4, 0.2}), 0.3);
  EXPECT_NEAR(params.rho, 0.3 + 0.7 * 0.4, 1e-15);
  EXPECT_NEAR(params.pi_rho, 0.8, 1e-15);
}

TEST(LongestRun, ConstantSeriesRejects) {
  const auto s = make(2, std::vector<Code>(100, 1));
  EXPECT_TRUE(longest_run_test(s, vec({0.5, 0.5}), 0.05).reject);
  EXPECT_TRUE(longest_run_test(s, vec({0.5, 0.5}), 0.05, LongestRunRule::Band).reject);
}

TEST(LongestRun, PowerLimitsAndMonotonicity) {
  const auto pi = vec({0.5, 0.5});
  EXPECT_NEAR(longest_run_power(pi, 0.0, 100, 0.05), 0.05, 1e-12);
  EXPECT_NEAR(longest_run_power(pi, 1e-6, 100, 0.05), 0.05, 0.02);
  double prev = 0.0;
  for (double a : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double p = longest_run_power(pi, a, 100, 0.05);
    EXPECT_GE(p, prev - 1e-12);
    prev = p;
  }
  EXPECT_GT(longest_run_power(pi, 0.9, 200, 0.05), 0.95);
  EXPECT_THROW(longest_run_power(pi, 1.0, 100, 0.05), Error);
}
