#include "catseries/glm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "catseries/error.hpp"

namespace catseries {

namespace {

constexpr int kMaxIterations = 100;
constexpr double kGradientTolerance = 1e-8;
constexpr double kSeparationBound = 30.0;

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct Prepared {
  std::vector<Code> categories;
  std::vector<int> columns;
  std::vector<int> y;
  Eigen::MatrixXd x;
  std::vector<std::string> notes;
};

Prepared prepare(const Design& design, bool keep_intercept) {
  if (design.rows.empty()) throw Error(ErrorCode::NoUsableRows, "design has no rows");
  Prepared prep;
  std::set<Code> seen;
  for (const auto& r : design.rows) seen.insert(r.response);
  prep.categories.assign(seen.begin(), seen.end());
  if (prep.categories.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "response takes fewer than two distinct values");
  }
  if (prep.categories.size() < design.k) {
    prep.notes.push_back(std::to_string(design.k - prep.categories.size()) +
                         " unobserved response categor(y/ies) collapsed out of the fit");
  }
  for (const auto& r : design.rows) {
    const auto it = std::lower_bound(prep.categories.begin(), prep.categories.end(), r.response);
    prep.y.push_back(static_cast<int>(it - prep.categories.begin()));
  }

  const auto n = static_cast<Eigen::Index>(design.rows.size());
  const auto p = design.rows.front().covariates.size();
  Eigen::MatrixXd full(n, p);
  for (Eigen::Index i = 0; i < n; ++i) full.row(i) = design.rows[static_cast<std::size_t>(i)].covariates.transpose();

  // Greedy rank-revealing selection; the intercept is always in the span.
  Eigen::MatrixXd basis = Eigen::MatrixXd::Ones(n, 1);
  if (keep_intercept) prep.columns.push_back(0);
  int dropped = 0;
  for (Eigen::Index c = 1; c < p; ++c) {
    Eigen::MatrixXd trial(n, basis.cols() + 1);
    trial << basis, full.col(c);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(trial);
    qr.setThreshold(1e-10);
    if (qr.rank() == trial.cols()) {
      basis = std::move(trial);
      prep.columns.push_back(static_cast<int>(c));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) prep.notes.push_back(std::to_string(dropped) + " constant or aliased covariate column(s) dropped");

  prep.x.resize(n, static_cast<Eigen::Index>(prep.columns.size()));
  for (std::size_t c = 0; c < prep.columns.size(); ++c) {
    prep.x.col(static_cast<Eigen::Index>(c)) = full.col(prep.columns[c]);
  }
  return prep;
}

struct NewtonResult {
  Eigen::VectorXd theta;
  Objective objective;
  int iterations = 0;
  bool converged = false;
};

template <class Eval, class Feasible>
NewtonResult newton_maximise(Eval&& eval, Feasible&& feasible, Eigen::VectorXd theta) {
  NewtonResult res;
  Objective cur = eval(theta);
  for (int it = 0; it < kMaxIterations; ++it) {
    if (cur.gradient.size() == 0 || cur.gradient.cwiseAbs().maxCoeff() < kGradientTolerance) {
      res.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-cur.hessian);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 1e-12 * ldlt.vectorD().cwiseAbs().maxCoeff()).all()) {
      throw Error(ErrorCode::SingularHessian, "information matrix is not positive definite");
    }
    const Eigen::VectorXd direction = ldlt.solve(cur.gradient);
    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      const Eigen::VectorXd cand = theta + step * direction;
      if (!feasible(cand)) continue;
      Objective next = eval(cand);
      if (std::isfinite(next.value) && next.value >= cur.value - 1e-12 * (1.0 + std::abs(cur.value))) {
        theta = cand;
        cur = std::move(next);
        accepted = true;
        break;
      }
    }
    res.iterations = it + 1;
    if (!accepted) break;
    if (theta.cwiseAbs().maxCoeff() > kSeparationBound) {
      throw Error(ErrorCode::Separation, "coefficients diverge (|coef| > 30)");
    }
  }
  if (!res.converged && cur.gradient.cwiseAbs().maxCoeff() < kGradientTolerance) res.converged = true;
  res.theta = std::move(theta);
  res.objective = std::move(cur);
  return res;
}

}  // namespace

std::string_view to_string(GlmFamily f) noexcept {
  return f == GlmFamily::MultinomialLogit ? "categorical" : "ordinal";
}

Design build_design(const CatSeries& series, int lag, std::optional<int> require_lag) {
  if (lag < 0 || lag > 2) throw Error(ErrorCode::InvalidArgument, "lag must be 0, 1 or 2");
  const int need = require_lag.value_or(lag);
  if (need < lag) throw Error(ErrorCode::InvalidArgument, "require_lag below lag");
  const auto k = series.k();
  Design d;
  d.k = k;
  d.lag = lag;
  const auto p = static_cast<Eigen::Index>(1 + static_cast<std::size_t>(lag) * (k - 1));
  for (std::size_t t = static_cast<std::size_t>(need); t < series.size(); ++t) {
    bool usable = series[t] != kMissing;
    for (int l = 1; usable && l <= need; ++l) usable = series[t - static_cast<std::size_t>(l)] != kMissing;
    if (!usable) continue;
    DesignRow row;
    row.t = t;
    row.response = series[t];
    row.covariates = Eigen::VectorXd::Zero(p);
    row.covariates(0) = 1.0;
    for (int l = 1; l <= lag; ++l) {
      const Code lagged = series[t - static_cast<std::size_t>(l)];
      if (lagged >= 2) {
        row.covariates(1 + static_cast<Eigen::Index>((l - 1) * static_cast<int>(k - 1)) + (lagged - 2)) = 1.0;
      }
    }
    d.rows.push_back(std::move(row));
  }
  if (d.rows.empty()) throw Error(ErrorCode::NoUsableRows, "no time point has all required lags observed");
  return d;
}

Objective multinomial_objective(const Eigen::MatrixXd& x, std::span<const int> y, int m, const Eigen::VectorXd& theta) {
  const auto n = x.rows();
  const auto p = x.cols();
  const auto q = static_cast<Eigen::Index>(m - 1);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> beta(theta.data(), q,
                                                                                                        p);
  Objective obj;
  obj.gradient = Eigen::VectorXd::Zero(q * p);
  obj.hessian = Eigen::MatrixXd::Zero(q * p, q * p);
  Eigen::VectorXd eta(q), prob(q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = x.row(i).transpose();
    eta = beta * xi;
    const double shift = std::max(0.0, eta.maxCoeff());
    prob = (eta.array() - shift).exp();
    const double denom = std::exp(-shift) + prob.sum();
    prob /= denom;
    const int yi = y[static_cast<std::size_t>(i)];
    obj.value += (yi < m - 1 ? eta(yi) : 0.0) - shift - std::log(denom);
    const Eigen::MatrixXd outer = xi * xi.transpose();
    for (Eigen::Index j = 0; j < q; ++j) {
      obj.gradient.segment(j * p, p) += ((yi == j ? 1.0 : 0.0) - prob(j)) * xi;
      for (Eigen::Index l = j; l < q; ++l) {
        const double w = prob(j) * ((j == l ? 1.0 : 0.0) - prob(l));
        obj.hessian.block(j * p, l * p, p, p) -= w * outer;
      }
    }
  }
  for (Eigen::Index j = 0; j < q; ++j) {
    for (Eigen::Index l = j + 1; l < q; ++l) {
      obj.hessian.block(l * p, j * p, p, p) = obj.hessian.block(j * p, l * p, p, p).transpose();
    }
  }
  return obj;
}

Objective ordinal_objective(const Eigen::MatrixXd& x, std::span<const int> y, int m, const Eigen::VectorXd& theta) {
  const auto n = x.rows();
  const auto s = x.cols();
  const auto q = static_cast<Eigen::Index>(m - 1);
  const auto cut = theta.head(q);
  const auto slope = theta.tail(s);
  Objective obj;
  obj.gradient = Eigen::VectorXd::Zero(q + s);
  obj.hessian = Eigen::MatrixXd::Zero(q + s, q + s);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = x.row(i).transpose();
    const double lin = s > 0 ? xi.dot(slope) : 0.0;
    const Eigen::Index yi = y[static_cast<std::size_t>(i)];
    const bool has_upper = yi < q;
    const bool has_lower = yi > 0;
    const double su = has_upper ? sigmoid(cut(yi) - lin) : 1.0;
    const double sl = has_lower ? sigmoid(cut(yi - 1) - lin) : 0.0;
    const double a = has_upper ? su * (1.0 - su) : 0.0;
    const double b = has_lower ? sl * (1.0 - sl) : 0.0;
    const double da = has_upper ? a * (1.0 - 2.0 * su) : 0.0;
    const double db = has_lower ? b * (1.0 - 2.0 * sl) : 0.0;
    const double prob = std::max(su - sl, std::numeric_limits<double>::min());
    const double g = a - b;
    obj.value += std::log(prob);

    if (has_upper) {
      obj.gradient(yi) += a / prob;
      obj.hessian(yi, yi) += da / prob - a * a / (prob * prob);
    }
    if (has_lower) {
      obj.gradient(yi - 1) -= b / prob;
      obj.hessian(yi - 1, yi - 1) += -db / prob - b * b / (prob * prob);
    }
    if (has_upper && has_lower) {
      obj.hessian(yi, yi - 1) += a * b / (prob * prob);
      obj.hessian(yi - 1, yi) += a * b / (prob * prob);
    }
    if (s > 0) {
      obj.gradient.tail(s) -= (g / prob) * xi;
      obj.hessian.bottomRightCorner(s, s) += ((da - db) / prob - g * g / (prob * prob)) * (xi * xi.transpose());
      if (has_upper) {
        const Eigen::VectorXd cross = -(da / prob - a * g / (prob * prob)) * xi;
        obj.hessian.block(q, yi, s, 1) += cross;
        obj.hessian.block(yi, q, 1, s) += cross.transpose();
      }
      if (has_lower) {
        const Eigen::VectorXd cross = -(-db / prob + b * g / (prob * prob)) * xi;
        obj.hessian.block(q, yi - 1, s, 1) += cross;
        obj.hessian.block(yi - 1, q, 1, s) += cross.transpose();
      }
    }
  }
  return obj;
}

Eigen::VectorXd GlmFit::probabilities(const Eigen::VectorXd& covariates) const {
  const auto m = static_cast<Eigen::Index>(categories.size());
  Eigen::VectorXd x(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) x(static_cast<Eigen::Index>(c)) = covariates(columns[c]);
  Eigen::VectorXd out(m);
  if (family == GlmFamily::MultinomialLogit) {
    Eigen::VectorXd eta(m);
    eta.head(m - 1) = coefficients * x;
    eta(m - 1) = 0.0;
    const double shift = eta.maxCoeff();
    out = (eta.array() - shift).exp();
    out /= out.sum();
  } else {
    const double lin = x.size() > 0 ? x.dot(slopes) : 0.0;
    double prev = 0.0;
    for (Eigen::Index j = 0; j < m - 1; ++j) {
      const double cum = sigmoid(cutpoints(j) - lin);
      out(j) = cum - prev;
      prev = cum;
    }
    out(m - 1) = 1.0 - prev;
  }
  return out;
}

GlmFit fit_multinomial(const Design& design) {
  auto prep = prepare(design, true);
  const int m = static_cast<int>(prep.categories.size());
  const auto p = prep.x.cols();
  const auto eval = [&](const Eigen::VectorXd& th) { return multinomial_objective(prep.x, prep.y, m, th); };
  auto res = newton_maximise(eval, [](const Eigen::VectorXd&) { return true; },
                             Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m - 1) * p));

  GlmFit fit;
  fit.family = GlmFamily::MultinomialLogit;
  fit.lag = design.lag;
  fit.categories = prep.categories;
  fit.columns = prep.columns;
  fit.coefficients = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      res.theta.data(), m - 1, p);
  fit.log_pl = res.objective.value;
  fit.n_params = static_cast<std::size_t>(res.theta.size());
  fit.aic = -2.0 * fit.log_pl + 2.0 * static_cast<double>(fit.n_params);
  fit.n_used = design.n_used();
  fit.iterations = res.iterations;
  fit.gradient_norm = res.objective.gradient.size() ? res.objective.gradient.cwiseAbs().maxCoeff() : 0.0;
  fit.notes = std::move(prep.notes);
  if (!res.converged) fit.notes.push_back("Newton iterations stopped before the gradient tolerance");
  return fit;
}

GlmFit fit_proportional_odds(const Design& design) {
  auto prep = prepare(design, false);
  const int m = static_cast<int>(prep.categories.size());
  const auto s = prep.x.cols();
  const auto q = static_cast<Eigen::Index>(m - 1);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(q + s);
  std::vector<double> freq(static_cast<std::size_t>(m), 0.0);
  for (const int yi : prep.y) freq[static_cast<std::size_t>(yi)] += 1.0;
  double cum = 0.0;
  for (Eigen::Index j = 0; j < q; ++j) {
    cum += freq[static_cast<std::size_t>(j)] / static_cast<double>(prep.y.size());
    theta(j) = std::log(cum / (1.0 - cum));
  }
  const auto ordered = [q](const Eigen::VectorXd& th) {
    for (Eigen::Index j = 1; j < q; ++j) {
      if (!(th(j) > th(j - 1))) return false;
    }
    return true;
  };
  const auto eval = [&](const Eigen::VectorXd& th) { return ordinal_objective(prep.x, prep.y, m, th); };
  auto res = newton_maximise(eval, ordered, theta);
  if (!ordered(res.theta)) throw Error(ErrorCode::NonmonotoneCutpoints, "cutpoints lost their ordering");

  GlmFit fit;
  fit.family = GlmFamily::ProportionalOdds;
  fit.lag = design.lag;
  fit.categories = prep.categories;
  fit.columns = prep.columns;
  fit.cutpoints = res.theta.head(q);
  fit.slopes = res.theta.tail(s);
  fit.log_pl = res.objective.value;
  fit.n_params = static_cast<std::size_t>(res.theta.size());
  fit.aic = -2.0 * fit.log_pl + 2.0 * static_cast<double>(fit.n_params);
  fit.n_used = design.n_used();
  fit.iterations = res.iterations;
  fit.gradient_norm = res.objective.gradient.cwiseAbs().maxCoeff();
  fit.notes = std::move(prep.notes);
  if (!res.converged) fit.notes.push_back("Newton iterations stopped before the gradient tolerance");
  return fit;
}

GlmFit fit_glm(const Design& design, GlmFamily family) {
  return family == GlmFamily::MultinomialLogit ? fit_multinomial(design) : fit_proportional_odds(design);
}

const AicRow* AicTable::best() const noexcept {
  for (const auto& r : rows) {
    if (r.best) return &r;
  }
  return nullptr;
}

AicTable aic_table(const CatSeries& series, GlmFamily family, std::span<const int> lags, bool common_rows) {
  std::vector<int> sorted(lags.begin(), lags.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  AicTable table;
  table.family = family;
  table.common_rows = common_rows;
  const std::optional<int> require =
      common_rows && !sorted.empty() ? std::optional<int>(sorted.back()) : std::nullopt;
  for (const int lag : sorted) {
    AicRow row;
    row.lag = lag;
    try {
      const auto design = build_design(series, lag, require);
      row.n_used = design.n_used();
      const auto fit = fit_glm(design, family);
      row.n_params = fit.n_params;
      row.log_pl = fit.log_pl;
      row.aic = fit.aic;
    } catch (const Error& e) {
      row.failure = std::string(to_string(e.code()));
    }
    table.rows.push_back(std::move(row));
  }
  AicRow* best = nullptr;
  for (auto& r : table.rows) {
    if (r.aic && (!best || *r.aic < *best->aic)) best = &r;
  }
  if (best) best->best = true;
  return table;
}

namespace {

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::string aic_table_csv(const AicTable& table) {
  std::ostringstream os;
  os << "family,lag,n_params,log_pl,aic,n_used,best\n";
  for (const auto& r : table.rows) {
    os << to_string(table.family) << ',' << r.lag << ',' << (r.n_params ? std::to_string(*r.n_params) : "NA") << ','
       << (r.log_pl ? fixed(*r.log_pl, 4) : "NA") << ',' << (r.aic ? fixed(*r.aic, 4) : "NA") << ',' << r.n_used
       << ',' << (r.best ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string aic_table_text(const AicTable& table) {
  std::ostringstream os;
  os << to_string(table.family) << " regression" << (table.common_rows ? " (common rows)" : "") << '\n';
  os << std::left << std::setw(10) << "model" << std::right << std::setw(10) << "n_params" << std::setw(12) << "AIC"
     << std::setw(10) << "n_used" << '\n';
  for (const auto& r : table.rows) {
    const std::string name = r.lag == 0 ? "indep" : (r.lag == 1 ? "lag 1" : "lags 1-2");
    os << std::left << std::setw(10) << name << std::right << std::setw(10)
       << (r.n_params ? std::to_string(*r.n_params) : "NA") << std::setw(12) << (r.aic ? fixed(*r.aic, 2) : "NA")
       << std::setw(10) << r.n_used << (r.best ? "  *" : "") << (r.failure.empty() ? "" : "  (" + r.failure + ")")
       << '\n';
  }
  return os.str();
}

std::string aic_table_markdown(const AicTable& table) {
  std::ostringstream os;
  os << "| Model | Nb param | AIC | Nb obs |\n|---|---|---|---|\n";
  for (const auto& r : table.rows) {
    const std::string name = r.lag == 0 ? "Indep." : (r.lag == 1 ? "Lag 1" : "Lags 1-2");
    std::string aic = r.aic ? fixed(*r.aic, 2) : "NA";
    if (r.best) aic = "**" + aic + "**";
    os << "| " << name << " | " << (r.n_params ? std::to_string(*r.n_params) : "NA") << " | " << aic << " | "
       << r.n_used << " |\n";
  }
  return os.str();
}

}  // namespace catseries
