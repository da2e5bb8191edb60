#include "catseries/dar.hpp"

#include <cmath>
#include <vector>

#include "catseries/error.hpp"
#include "catseries/rng.hpp"

namespace catseries {

namespace {

void check_pi(const Eigen::VectorXd& pi, std::size_t k) {
  if (static_cast<std::size_t>(pi.size()) != k) {
    throw Error(ErrorCode::InvalidArgument, "pi has " + std::to_string(pi.size()) + " entries, expected " +
                                                std::to_string(k));
  }
  if ((pi.array() < 0.0).any() || !pi.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "pi has a negative or non-finite entry");
  }
  if (std::abs(pi.sum() - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "pi does not sum to 1");
  }
}

Code draw_category(Rng& rng, const Eigen::VectorXd& pi) {
  const double u = rng.uniform();
  double cum = 0.0;
  const auto k = pi.size();
  for (Eigen::Index j = 0; j + 1 < k; ++j) {
    cum += pi(j);
    if (u < cum) return static_cast<Code>(j) + 1;
  }
  // Trailing zero-probability states are never returned.
  for (Eigen::Index j = k - 1; j > 0; --j) {
    if (pi(j) > 0.0) return static_cast<Code>(j) + 1;
  }
  return 1;
}

std::vector<Code> latent_path(const DarModel& model, std::size_t n, Rng& rng) {
  std::vector<Code> x(n + 1);
  x[0] = draw_category(rng, model.pi());
  for (std::size_t t = 1; t <= n; ++t) {
    const bool keep = rng.uniform() < model.alpha();
    const Code fresh = draw_category(rng, model.pi());
    x[t] = keep ? x[t - 1] : fresh;
  }
  return x;
}

}  // namespace

DarModel::DarModel(double alpha, Eigen::VectorXd pi, StateSpace space)
    : alpha_(alpha), pi_(std::move(pi)), space_(std::move(space)) {
  if (!(alpha_ >= 0.0 && alpha_ < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1)");
  }
  check_pi(pi_, space_.size());
}

DarModel::DarModel(double alpha, Eigen::VectorXd pi)
    : DarModel(alpha, pi, StateSpace::numbered(static_cast<std::size_t>(pi.size()))) {}

MissingDarModel::MissingDarModel(DarModel base, double beta) : base_(std::move(base)), beta_(beta) {
  if (!(beta_ >= 0.0 && beta_ < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "beta must lie in [0, 1)");
  }
}

Eigen::MatrixXd transition_matrix(const DarModel& model) {
  const auto k = static_cast<Eigen::Index>(model.k());
  Eigen::MatrixXd p = (1.0 - model.alpha()) * Eigen::VectorXd::Ones(k) * model.pi().transpose();
  p.diagonal().array() += model.alpha();
  return p;
}

Eigen::MatrixXd transition_matrix_power(const DarModel& model, int h) {
  if (h < 1) throw Error(ErrorCode::InvalidArgument, "power must be at least 1");
  if (h == 1) return transition_matrix(model);
  const double ah = std::pow(model.alpha(), h);
  const auto k = static_cast<Eigen::Index>(model.k());
  Eigen::MatrixXd p = (1.0 - ah) * Eigen::VectorXd::Ones(k) * model.pi().transpose();
  p.diagonal().array() += ah;
  return p;
}

double autocorrelation(const DarModel& model, int h) {
  if (h < 0) throw Error(ErrorCode::InvalidArgument, "lag must be nonnegative");
  return h == 0 ? 1.0 : std::pow(model.alpha(), h);
}

CatSeries simulate(const DarModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  Rng rng(seed);
  return CatSeries(model.space(), latent_path(model, n, rng));
}

CatSeries simulate_with_missing(const MissingDarModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  Rng rng(seed);
  auto x = latent_path(model.base(), n, rng);
  for (auto& v : x) {
    if (rng.uniform() < model.beta()) v = kMissing;
  }
  return CatSeries(model.base().space(), std::move(x));
}

Eigen::MatrixXd augmented_transition_matrix(const MissingDarModel& model) {
  const auto k = static_cast<Eigen::Index>(model.base().k());
  const double beta = model.beta();
  Eigen::MatrixXd out(k + 1, k + 1);
  out.col(0).setConstant(beta);
  out.block(0, 1, 1, k) = (1.0 - beta) * model.base().pi().transpose();
  out.block(1, 1, k, k) = (1.0 - beta) * transition_matrix(model.base());
  return out;
}

}  // namespace catseries
