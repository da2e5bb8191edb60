#include <random>

#include <gtest/gtest.h>

#include "catseries/dar.hpp"
#include "catseries/error.hpp"
#include "oracles.hpp"

using namespace catseries;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST(DarModel, ValidatesParameters) {
  EXPECT_THROW(DarModel(1.0, vec({0.5, 0.5})), Error);
  EXPECT_THROW(DarModel(-0.1, vec({0.5, 0.5})), Error);
  EXPECT_THROW(DarModel(0.5, vec({0.6, 0.5})), Error);
  EXPECT_THROW(DarModel(0.5, vec({1.2, -0.2})), Error);
  EXPECT_THROW(MissingDarModel(DarModel(0.5, vec({0.5, 0.5})), 1.0), Error);
}

TEST(TransitionMatrix, Examples) {
  const auto iid = transition_matrix(DarModel(0.0, vec({0.3, 0.7})));
  EXPECT_DOUBLE_EQ(iid(0, 0), 0.3);
  EXPECT_DOUBLE_EQ(iid(1, 0), 0.3);
  EXPECT_DOUBLE_EQ(iid(0, 1), 0.7);
  EXPECT_DOUBLE_EQ(iid(1, 1), 0.7);

  const auto p = transition_matrix(DarModel(0.5, vec({0.5, 0.5})));
  EXPECT_TRUE(p.isApprox((Eigen::MatrixXd(2, 2) << 0.75, 0.25, 0.25, 0.75).finished(), 1e-15));
}

TEST(TransitionMatrix, StochasticStationaryAndDiagonallyDominant) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 0.999);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + static_cast<int>(gen() % 5);
    const DarModel model(u(gen), oracle::random_simplex(gen, k));
    const auto p = transition_matrix(model);
    EXPECT_TRUE(p.isApprox(oracle::dar_matrix(model.alpha(), model.pi()), 1e-14));
    for (Eigen::Index j = 0; j < k; ++j) {
      EXPECT_NEAR(p.row(j).sum(), 1.0, 1e-12);
      EXPECT_NEAR(p(j, j) - model.pi()(j), model.alpha() * (1.0 - model.pi()(j)), 1e-14);
    }
    EXPECT_LT((model.pi().transpose() * p - model.pi().transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(TransitionMatrixPower, Examples) {
  const DarModel model(0.5, vec({0.5, 0.5}));
  EXPECT_EQ(transition_matrix_power(model, 1), transition_matrix(model));
  EXPECT_TRUE(transition_matrix_power(model, 2).isApprox((Eigen::MatrixXd(2, 2) << 0.625, 0.375, 0.375, 0.625).finished(),
                                                         1e-15));
  const DarModel iid(0.0, vec({0.2, 0.3, 0.5}));
  for (int h : {1, 2, 7}) {
    const auto q = transition_matrix_power(iid, h);
    for (Eigen::Index r = 0; r < 3; ++r) EXPECT_TRUE(q.row(r).isApprox(iid.pi().transpose(), 1e-15));
  }
  EXPECT_THROW(transition_matrix_power(model, 0), Error);
}

TEST(TransitionMatrixPower, MatchesRepeatedMultiplication) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 0.999);
  for (int trial = 0; trial < 50; ++trial) {
    const DarModel model(u(gen), oracle::random_simplex(gen, 2 + static_cast<int>(gen() % 5)));
    const auto p = oracle::dar_matrix(model.alpha(), model.pi());
    for (int h = 1; h <= 20; ++h) {
      EXPECT_LT((transition_matrix_power(model, h) - oracle::repeated_product(p, h)).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Autocorrelation, Powers) {
  EXPECT_DOUBLE_EQ(autocorrelation(DarModel(0.5, vec({0.5, 0.5})), 0), 1.0);
  EXPECT_DOUBLE_EQ(autocorrelation(DarModel(0.5, vec({0.5, 0.5})), 3), 0.125);
  EXPECT_DOUBLE_EQ(autocorrelation(DarModel(0.0, vec({0.5, 0.5})), 2), 0.0);
}

TEST(Simulate, DeterministicGivenSeed) {
  const DarModel model(0.4, vec({0.2, 0.5, 0.3}));
  const auto a = simulate(model, 300, 42);
  const auto b = simulate(model, 300, 42);
  const auto c = simulate(model, 300, 43);
  EXPECT_EQ(a.size(), 301u);
  EXPECT_TRUE(std::equal(a.codes().begin(), a.codes().end(), b.codes().begin()));
  EXPECT_FALSE(std::equal(a.codes().begin(), a.codes().end(), c.codes().begin()));
}

TEST(Simulate, IidFrequenciesConvergeToPi) {
  const auto pi = vec({0.2, 0.5, 0.3});
  for (double alpha : {0.0, 0.5}) {
    const auto s = simulate(DarModel(alpha, pi), 100000, 7);
    Eigen::VectorXd freq = Eigen::VectorXd::Zero(3);
    for (Code c : s.codes()) freq(c - 1) += 1.0;
    freq /= static_cast<double>(s.size());
    EXPECT_LT((freq - pi).cwiseAbs().maxCoeff(), 0.01) << "alpha=" << alpha;
  }
}

TEST(Simulate, NearAbsorbingChainRarelyMoves) {
  const auto s = simulate(DarModel(0.999, vec({0.5, 0.5})), 50, 1);
  int changes = 0;
  for (std::size_t t = 1; t < s.size(); ++t) changes += s[t] != s[t - 1];
  EXPECT_LE(changes, 3);
}

TEST(Simulate, SameStateFrequencyMatchesTransitionMatrix) {
  const DarModel model(0.5, vec({0.5, 0.5}));
  const auto s = simulate(model, 100000, 2024);
  double same = 0.0;
  for (std::size_t t = 1; t < s.size(); ++t) same += s[t] == s[t - 1];
  EXPECT_NEAR(same / static_cast<double>(s.n()), transition_matrix(model)(0, 0), 0.01);
}

TEST(SimulateWithMissing, BetaZeroReproducesSimulate) {
  const DarModel base(0.3, vec({0.25, 0.5, 0.25}));
  const auto plain = simulate(base, 500, 99);
  const auto thinned = simulate_with_missing(MissingDarModel(base, 0.0), 500, 99);
  EXPECT_TRUE(std::equal(plain.codes().begin(), plain.codes().end(), thinned.codes().begin()));
}

TEST(SimulateWithMissing, LatentPathIsSharedAcrossBeta) {
  const DarModel base(0.6, vec({0.5, 0.5}));
  const auto plain = simulate(base, 400, 5);
  const auto thinned = simulate_with_missing(MissingDarModel(base, 0.4), 400, 5);
  for (std::size_t t = 0; t < plain.size(); ++t) {
    if (thinned[t] != kMissing) EXPECT_EQ(thinned[t], plain[t]);
  }
}

TEST(SimulateWithMissing, MissingRateAndObservedFrequencies) {
  const auto s = simulate_with_missing(MissingDarModel(DarModel(0.2, vec({0.5, 0.5})), 0.9), 10000, 3);
  EXPECT_NEAR(static_cast<double>(s.missing_count()) / static_cast<double>(s.size()), 0.9, 0.02);

  const auto pi = vec({0.2, 0.8});
  const auto t = simulate_with_missing(MissingDarModel(DarModel(0.0, pi), 0.5), 100000, 4);
  double ones = 0.0;
  for (Code c : t.codes()) ones += c == 1;
  EXPECT_NEAR(ones / static_cast<double>(t.observed_count()), 0.2, 0.01);
}

TEST(AugmentedTransitionMatrix, Examples) {
  const DarModel base(0.4, vec({0.3, 0.7}));
  const auto a0 = augmented_transition_matrix(MissingDarModel(base, 0.0));
  EXPECT_TRUE(a0.block(1, 1, 2, 2).isApprox(transition_matrix(base), 1e-15));
  EXPECT_DOUBLE_EQ(a0.col(0).cwiseAbs().maxCoeff(), 0.0);

  const auto a = augmented_transition_matrix(MissingDarModel(DarModel(0.0, vec({0.5, 0.5})), 0.5));
  for (Eigen::Index r = 0; r < 3; ++r) {
    EXPECT_TRUE(a.row(r).isApprox((Eigen::RowVectorXd(3) << 0.5, 0.25, 0.25).finished(), 1e-15));
  }
}

TEST(AugmentedTransitionMatrix, RowsSumToOne) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 0.999);
  for (int trial = 0; trial < 100; ++trial) {
    const MissingDarModel model(DarModel(u(gen), oracle::random_simplex(gen, 2 + static_cast<int>(gen() % 5))), u(gen));
    const auto a = augmented_transition_matrix(model);
    EXPECT_LT((a.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}
