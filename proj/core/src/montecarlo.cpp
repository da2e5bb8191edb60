#include "catseries/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "catseries/dar.hpp"
#include "catseries/error.hpp"
#include "catseries/estimate.hpp"
#include "catseries/rng.hpp"

namespace catseries {

namespace {

struct Replicate {
  Eigen::VectorXd pi_hat;
  double alpha1 = 0.0;
  bool valid1 = false;
  double alpha2 = 0.0;
  bool valid2 = false;
};

Replicate run_replicate(const DarModel& model, std::size_t n, std::uint64_t seed) {
  const auto series = simulate(model, n, seed);
  Replicate r;
  r.pi_hat = estimate_pi(series).pi_hat;
  const auto a1 = estimate_alpha_mle(series, r.pi_hat);
  r.alpha1 = a1.alpha_hat;
  r.valid1 = a1.valid();
  try {
    const auto a2 = estimate_alpha_ls(series, r.pi_hat);
    r.alpha2 = a2.alpha_hat;
    r.valid2 = a2.valid();
  } catch (const Error&) {
    r.valid2 = false;
  }
  return r;
}

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

SimGrid SimGrid::reference() {
  SimGrid g;
  g.pis = {
      (Eigen::VectorXd(2) << 0.5, 0.5).finished(),
      (Eigen::VectorXd(2) << 1.0 / 3.0, 2.0 / 3.0).finished(),
      (Eigen::VectorXd(3) << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).finished(),
      (Eigen::VectorXd(3) << 0.25, 0.5, 0.25).finished(),
  };
  g.alphas = {0.1, 0.2, 0.5, 0.8, 0.9};
  g.ns = {50, 100, 500};
  g.m = 100;
  return g;
}

void SimGrid::validate() const {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be at least 1");
  for (const double a : alphas) {
    if (!(a >= 0.0 && a < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha outside [0, 1)");
  }
  for (const auto n : ns) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  }
  for (const auto& p : pis) DarModel(0.0, p);
}

std::uint64_t replicate_seed(std::uint64_t master, std::size_t cell, std::size_t replicate) noexcept {
  return derive_seed(derive_seed(master, cell), replicate);
}

std::vector<CellResult> run_grid(const SimGrid& grid, unsigned threads) {
  grid.validate();
  struct Task {
    std::size_t cell, replicate;
  };
  std::vector<CellResult> cells;
  std::vector<DarModel> models;
  for (std::size_t pi_index = 0; pi_index < grid.pis.size(); ++pi_index) {
    for (const double alpha : grid.alphas) {
      for (const auto n : grid.ns) {
        CellResult c;
        c.pi_index = pi_index;
        c.pi = grid.pis[pi_index];
        c.alpha = alpha;
        c.n = n;
        c.m = grid.m;
        cells.push_back(std::move(c));
        models.emplace_back(alpha, grid.pis[pi_index]);
      }
    }
  }

  const std::size_t total = cells.size() * grid.m;
  std::vector<Replicate> results(total);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t cell = i / grid.m, rep = i % grid.m;
      results[i] = run_replicate(models[cell], cells[cell].n, replicate_seed(grid.seed, cell, rep));
    }
  };
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, total)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  // Fixed-order reduction.
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto& cell = cells[c];
    cell.mean_pi_hat = Eigen::VectorXd::Zero(cell.pi.size());
    double sum1 = 0.0, sum2 = 0.0;
    for (std::size_t r = 0; r < grid.m; ++r) {
      const auto& rep = results[c * grid.m + r];
      cell.mean_pi_hat += rep.pi_hat;
      if (rep.valid1) {
        sum1 += rep.alpha1;
        ++cell.m1;
      }
      if (rep.valid2) {
        sum2 += rep.alpha2;
        ++cell.m2;
      }
    }
    cell.mean_pi_hat /= static_cast<double>(grid.m);
    cell.mean_alpha1 = cell.m1 ? sum1 / static_cast<double>(cell.m1) : std::nan("");
    cell.mean_alpha2 = cell.m2 ? sum2 / static_cast<double>(cell.m2) : std::nan("");
  }
  return cells;
}

std::string format_probabilities(const Eigen::VectorXd& v) {
  std::string out = "(";
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (j) out += ';';
    out += fixed3(v(j));
  }
  return out + ")";
}

std::string cells_csv(const std::vector<CellResult>& cells, std::size_t pi_index) {
  std::ostringstream os;
  os << "alpha,n,pi_hat,alpha1,m1,alpha2,m2\n";
  for (const auto& c : cells) {
    if (c.pi_index != pi_index) continue;
    os << c.alpha << ',' << c.n << ',' << format_probabilities(c.mean_pi_hat) << ',' << fixed3(c.mean_alpha1) << ','
       << c.m1 << ',' << fixed3(c.mean_alpha2) << ',' << c.m2 << '\n';
  }
  return os.str();
}

std::string cells_markdown(const std::vector<CellResult>& cells, std::size_t pi_index) {
  std::ostringstream os;
  for (const auto& c : cells) {
    if (c.pi_index == pi_index) {
      os << "Results obtained with pi=" << format_probabilities(c.pi) << "\n\n";
      break;
    }
  }
  os << "| alpha | n | pi_hat | alpha1_hat | m1 | alpha2_hat | m2 |\n";
  os << "|---|---|---|---|---|---|---|\n";
  for (const auto& c : cells) {
    if (c.pi_index != pi_index) continue;
    os << "| " << c.alpha << " | " << c.n << " | " << format_probabilities(c.mean_pi_hat) << " | "
       << fixed3(c.mean_alpha1) << " | " << c.m1 << " | " << fixed3(c.mean_alpha2) << " | " << c.m2 << " |\n";
  }
  return os.str();
}

}  // namespace catseries
