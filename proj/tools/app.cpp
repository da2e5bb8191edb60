#include "app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "catseries/dar.hpp"
#include "catseries/error.hpp"
#include "catseries/estimate.hpp"
#include "catseries/glm.hpp"
#include "catseries/independence.hpp"
#include "catseries/montecarlo.hpp"
#include "catseries/series.hpp"

namespace catseries::app {

namespace {

enum class Policy { Drop, LongestSegment, GapAware };
enum class Format { Csv, Markdown, Text };

struct Globals {
  std::string states;
  double level = 0.05;
  std::uint64_t seed = 20080101;
  std::string out;
  Policy policy = Policy::LongestSegment;
  Format format = Format::Text;
};

std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::Drop: return "drop";
    case Policy::LongestSegment: return "longest-segment";
    case Policy::GapAware: return "gap-aware";
  }
  return "?";
}

std::string num(double v, int digits = 4) {
  if (!std::isfinite(v)) return "NA";
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string num(const std::optional<double>& v, int digits = 4) { return v ? num(*v, digits) : "NA"; }

std::string probabilities(const Eigen::VectorXd& v, int digits = 4) {
  std::string s = "(";
  for (Eigen::Index j = 0; j < v.size(); ++j) s += (j ? ";" : "") + num(v(j), digits);
  return s + ")";
}

StateSpace load_states(const Globals& g) {
  if (g.states.empty()) throw Error(ErrorCode::InvalidArgument, "--states is required for this command");
  return StateSpace::load(g.states);
}

// Sends `text` to --out when given, otherwise to `out`.
void emit(const Globals& g, const std::string& text, std::ostream& out) {
  if (g.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + g.out);
  f << text;
}

struct Unit {
  std::string name;
  CatSeries series;
};

std::vector<Unit> load_units(const std::vector<std::string>& inputs, const StateSpace& space, bool concat) {
  std::vector<Unit> units;
  for (const auto& path : inputs) units.push_back({path, load_series(path, space)});
  if (concat && units.size() > 1) {
    std::vector<CatSeries> parts;
    std::string name;
    for (auto& u : units) {
      name += (name.empty() ? "" : "+") + u.name;
      parts.push_back(u.series);
    }
    CatSeries joined = concatenate(parts);
    units.clear();
    units.push_back({name, std::move(joined)});
  }
  return units;
}

CatSeries apply_policy(const CatSeries& s, Policy p) {
  if (!s.has_missing()) return s;
  return p == Policy::Drop ? drop_missing(s) : longest_complete_segment(s);
}

struct Tested {
  std::optional<TestReport> report;
  std::string failure;
};

template <class F>
Tested attempt(F&& f) {
  try {
    return {f(), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

struct TestBundle {
  std::size_t length = 0;
  Tested chi2, runs, longest;
  std::vector<std::string> notes;
};

TestBundle run_tests(const CatSeries& s, const Globals& g, std::optional<double> alpha1) {
  TestBundle b;
  if (s.has_missing()) {
    b.notes.push_back("tests use the " + std::string(g.policy == Policy::Drop ? "gap-free concatenation" : "longest complete segment") +
                      " (policy " + std::string(policy_name(g.policy)) + ")");
    if (g.policy == Policy::GapAware) b.notes.push_back("run statistics need contiguous values; gap-aware falls back to the longest segment");
  }
  std::optional<CatSeries> ts;
  try {
    ts = apply_policy(s, g.policy);
  } catch (const Error& e) {
    b.notes.push_back(std::string("no usable sub-series: ") + e.what());
    b.chi2.failure = b.runs.failure = b.longest.failure = std::string(to_string(e.code()));
    return b;
  }
  b.length = ts->size();
  const Eigen::VectorXd pi = estimate_pi(*ts).pi_hat;
  b.chi2 = attempt([&] { return chi_square_test(*ts, g.level); });
  b.runs = attempt([&] { return runs_count_test(*ts, pi, g.level, true); });
  b.longest = attempt([&] {
    auto rep = longest_run_test(*ts, pi, g.level);
    if (alpha1 && *alpha1 >= 0.0 && *alpha1 < 1.0) rep.power = longest_run_power(pi, *alpha1, ts->size(), g.level);
    return rep;
  });
  return b;
}

struct DarSummary {
  std::string name;
  std::size_t length = 0, observed = 0;
  Eigen::VectorXd pi_hat;
  AlphaEstimate alpha1;
  bool gapped = false;
  std::optional<AlphaEstimate> alpha2;
  std::string alpha2_failure;
  double beta_hat = 0.0;
  double aic = 0.0;
  std::size_t n_params = 0;
  TestBundle tests;
};

DarSummary analyze(const Unit& u, const Globals& g) {
  const auto& s = u.series;
  DarSummary d;
  d.name = u.name;
  d.length = s.size();
  d.observed = s.observed_count();
  d.pi_hat = estimate_pi(s).pi_hat;
  d.gapped = s.has_missing();
  d.alpha1 = d.gapped ? estimate_alpha_mle_gapped(s) : estimate_alpha_mle(s, d.pi_hat);
  try {
    d.alpha2 = estimate_alpha_ls(s, d.pi_hat);
  } catch (const Error& e) {
    d.alpha2_failure = e.what();
  }
  d.beta_hat = estimate_beta(s);

  double ll = dar_log_likelihood(s, std::clamp(d.alpha1.alpha_hat, 0.0, 1.0 - 1e-9), d.pi_hat);
  const auto visited = static_cast<std::size_t>((d.pi_hat.array() > 0.0).count());
  d.n_params = visited - 1 + 1;
  if (d.gapped) {
    const double m = static_cast<double>(s.missing_count());
    const double o = static_cast<double>(s.observed_count());
    ll += m * std::log(d.beta_hat) + o * std::log1p(-d.beta_hat);
    d.n_params += 1;
  }
  d.aic = -2.0 * ll + 2.0 * static_cast<double>(d.n_params);
  d.tests = run_tests(s, g, d.alpha1.alpha_hat);
  return d;
}

std::string verdict(const Tested& t) {
  if (!t.report) return "NA";
  return t.report->reject ? "reject" : "accept";
}

std::string test_lines(const TestBundle& b) {
  std::ostringstream os;
  os << "  tests on " << b.length << " values\n";
  const auto line = [&](const char* label, const Tested& t, const std::string& stat) {
    os << "    " << std::left << std::setw(18) << label;
    if (!t.report) {
      os << "NA (" << t.failure << ")\n";
      return;
    }
    os << stat << "=" << num(t.report->statistic) << "  p=" << num(t.report->p_value) << "  " << verdict(t);
    if (t.report->band) os << "  band=[" << num(t.report->band->first) << ", " << num(t.report->band->second) << "]";
    if (t.report->power) os << "  power=" << num(*t.report->power);
    os << "\n";
    for (const auto& n : t.report->notes) os << "      " << n << "\n";
  };
  line("chi-square Markov", b.chi2, "C2");
  line("runs count", b.runs, "z");
  line("longest run", b.longest, "L-1");
  for (const auto& n : b.notes) os << "  note: " << n << "\n";
  return os.str();
}

const char* kDarHeader =
    "series,length,observed,pi_hat,alpha1,alpha2,beta_hat,observed_fraction,aic,n_params,test_length,"
    "chi2,chi2_p,chi2_reject,runs_z,runs_p,runs_reject,longest_minus1,longest_reject,power,policy";

std::vector<std::string> dar_fields(const DarSummary& d, const Globals& g) {
  const auto stat = [](const Tested& t) { return t.report ? num(t.report->statistic) : std::string("NA"); };
  const auto p = [](const Tested& t) { return t.report ? num(t.report->p_value) : std::string("NA"); };
  const auto rej = [](const Tested& t) { return t.report ? std::string(t.report->reject ? "1" : "0") : std::string("NA"); };
  const auto& l = d.tests.longest;
  return {d.name,
          std::to_string(d.length),
          std::to_string(d.observed),
          probabilities(d.pi_hat),
          d.alpha1.converged ? num(d.alpha1.alpha_hat) : "NA",
          d.alpha2 && d.alpha2->valid() ? num(d.alpha2->alpha_hat) : "NA",
          num(d.beta_hat),
          num(1.0 - d.beta_hat),
          num(d.aic, 2),
          std::to_string(d.n_params),
          std::to_string(d.tests.length),
          stat(d.tests.chi2),
          p(d.tests.chi2),
          rej(d.tests.chi2),
          stat(d.tests.runs),
          p(d.tests.runs),
          rej(d.tests.runs),
          stat(l),
          rej(l),
          l.report && l.report->power ? num(*l.report->power) : "NA",
          std::string(policy_name(g.policy))};
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string render_dar(const std::vector<DarSummary>& ds, const Globals& g) {
  std::ostringstream os;
  if (g.format == Format::Csv) {
    os << kDarHeader << "\n";
    for (const auto& d : ds) os << join(dar_fields(d, g), ",") << "\n";
  } else if (g.format == Format::Markdown) {
    std::string header;
    for (char c : std::string(kDarHeader)) header += c == ',' ? std::string(" | ") : std::string(1, c);
    os << "| " << header << " |\n|";
    for (std::size_t i = 0; i < dar_fields(ds.front(), g).size(); ++i) os << "---|";
    os << "\n";
    for (const auto& d : ds) os << "| " << join(dar_fields(d, g), " | ") << " |\n";
  } else {
    for (const auto& d : ds) {
      os << "series " << d.name << "\n";
      os << "  length " << d.length << ", observed " << d.observed << ", missing-value policy " << policy_name(g.policy)
         << "\n";
      os << "  pi_hat      " << probabilities(d.pi_hat) << "\n";
      os << "  alpha1      " << (d.alpha1.converged ? num(d.alpha1.alpha_hat) : "NA")
         << (d.gapped ? "  (gap-aware maximum likelihood)" : "  (maximum likelihood)");
      if (!d.alpha1.converged) os << "  no root in [0, 1), boundary " << num(d.alpha1.alpha_hat);
      os << "\n  alpha2      ";
      if (d.alpha2) {
        os << (d.alpha2->valid() ? num(d.alpha2->alpha_hat) : "NA") << "  (least squares)";
        if (!d.alpha2->valid()) os << "  outside [0, 1): " << num(d.alpha2->alpha_hat);
      } else {
        os << "NA  (" << d.alpha2_failure << ")";
      }
      os << "\n  beta_hat    " << num(d.beta_hat) << "  (observed fraction " << num(1.0 - d.beta_hat) << ")\n";
      os << "  AIC         " << num(d.aic, 2) << "  (" << d.n_params << " parameters)\n";
      os << test_lines(d.tests);
    }
  }
  return os.str();
}

int cmd_simulate(const Globals& g, double alpha, const std::vector<double>& pi_list, std::size_t n, double beta,
                 std::ostream& out, std::ostream& err) {
  Eigen::VectorXd pi = Eigen::Map<const Eigen::VectorXd>(pi_list.data(), static_cast<Eigen::Index>(pi_list.size()));
  const StateSpace space = g.states.empty() ? StateSpace::numbered(pi_list.size()) : StateSpace::load(g.states);
  if (space.size() != pi_list.size()) throw Error(ErrorCode::InvalidArgument, "--pi length does not match the state space");
  const DarModel model(alpha, pi, space);
  const CatSeries s = beta > 0.0 ? simulate_with_missing(MissingDarModel(model, beta), n, g.seed) : simulate(model, n, g.seed);
  emit(g, serialize_series(s), out);
  std::ostream& info = g.out.empty() ? err : out;
  info << "DAR(1) alpha=" << alpha << " pi=" << probabilities(pi) << " n=" << n << " beta=" << beta << " seed=" << g.seed
       << ": " << s.size() << " values, " << s.missing_count() << " missing\n";
  return 0;
}

int cmd_fit_dar(const Globals& g, const std::vector<std::string>& inputs, bool concat, std::ostream& out) {
  const auto space = load_states(g);
  std::vector<DarSummary> ds;
  for (const auto& u : load_units(inputs, space, concat)) ds.push_back(analyze(u, g));
  emit(g, render_dar(ds, g), out);
  return 0;
}

int cmd_test(const Globals& g, const std::vector<std::string>& inputs, bool concat, std::optional<double> alpha1,
             std::ostream& out) {
  const auto space = load_states(g);
  std::ostringstream os;
  const bool csv = g.format == Format::Csv;
  const bool md = g.format == Format::Markdown;
  if (csv) os << "series,test,statistic,p_value,reject,band_lower,band_upper,power,failure\n";
  if (md) os << "| series | test | statistic | p-value | decision | band | power |\n|---|---|---|---|---|---|---|\n";
  for (const auto& u : load_units(inputs, space, concat)) {
    std::optional<double> a = alpha1;
    if (!a) {
      const auto& s = u.series;
      a = s.has_missing() ? estimate_alpha_mle_gapped(s).alpha_hat : estimate_alpha_mle(s, estimate_pi(s).pi_hat).alpha_hat;
    }
    const auto b = run_tests(u.series, g, a);
    if (!csv && !md) {
      os << "series " << u.name << "  (level " << g.level << ", power at alpha1=" << num(*a) << ")\n" << test_lines(b);
      continue;
    }
    for (const Tested* t : {&b.chi2, &b.runs, &b.longest}) {
      const auto& r = t->report;
      const std::string name = t == &b.chi2 ? "chi-square Markov" : t == &b.runs ? "runs count" : "longest run";
      const std::string lo = r && r->band ? num(r->band->first) : "NA";
      const std::string hi = r && r->band ? num(r->band->second) : "NA";
      const std::string pw = r && r->power ? num(*r->power) : "NA";
      if (csv) {
        os << u.name << "," << name << "," << (r ? num(r->statistic) : "NA") << "," << (r ? num(r->p_value) : "NA") << ","
           << (r ? (r->reject ? "1" : "0") : "NA") << "," << lo << "," << hi << "," << pw << "," << t->failure << "\n";
      } else {
        os << "| " << u.name << " | " << name << " | " << (r ? num(r->statistic) : "NA") << " | "
           << (r ? num(r->p_value) : "NA") << " | " << verdict(*t) << " | "
           << (r && r->band ? "[" + lo + ", " + hi + "]" : "") << " | " << pw << " |\n";
      }
    }
  }
  emit(g, os.str(), out);
  return 0;
}

int cmd_fit_glm(const Globals& g, bool policy_given, const std::vector<std::string>& inputs, bool concat,
                const std::string& family, const std::vector<int>& lags, bool strict, std::ostream& out) {
  const auto space = load_states(g);
  std::vector<GlmFamily> families;
  if (family != "ordinal") families.push_back(GlmFamily::MultinomialLogit);
  if (family != "categorical") families.push_back(GlmFamily::ProportionalOdds);
  std::ostringstream os;
  bool first_csv = true;
  for (const auto& u : load_units(inputs, space, concat)) {
    // Rows with a missing response or lag are masked; an explicit policy
    // other than gap-aware reshapes the series first.
    const CatSeries s = policy_given && g.policy != Policy::GapAware ? apply_policy(u.series, g.policy) : u.series;
    for (auto f : families) {
      const auto table = aic_table(s, f, lags, strict);
      if (g.format == Format::Csv) {
        std::string body = aic_table_csv(table);
        if (!first_csv) body = body.substr(body.find('\n') + 1);
        std::istringstream lines(body);
        std::string line;
        bool header = first_csv;
        while (std::getline(lines, line)) {
          os << (header ? "series," : u.name + ",") << line << "\n";
          header = false;
        }
        first_csv = false;
      } else if (g.format == Format::Markdown) {
        os << "### " << u.name << " (" << to_string(f) << ")\n\n" << aic_table_markdown(table) << "\n";
      } else {
        os << "series " << u.name << ", " << to_string(f) << " family" << (strict ? ", common rows" : "") << "\n"
           << aic_table_text(table) << "\n";
      }
    }
  }
  emit(g, os.str(), out);
  return 0;
}

int cmd_reproduce(const Globals& g, std::size_t m, bool markdown, unsigned threads, std::ostream& out) {
  auto grid = SimGrid::reference();
  grid.m = m;
  grid.seed = g.seed;
  const auto cells = run_grid(grid, threads);
  const std::filesystem::path dir = g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out);
  std::filesystem::create_directories(dir);
  for (std::size_t p = 0; p < grid.pis.size(); ++p) {
    const std::string stem = "table" + std::to_string(p + 1);
    const auto write = [&](const std::string& name, const std::string& text) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw Error(ErrorCode::IoError, "cannot write " + (dir / name).string());
      f << text;
    };
    const std::string csv = cells_csv(cells, p);
    write(stem + ".csv", csv);
    out << "Table " << p + 1 << ": pi=" << format_probabilities(grid.pis[p]) << ", m=" << m << ", seed=" << g.seed << "\n";
    if (markdown || g.format == Format::Markdown) {
      const std::string md = cells_markdown(cells, p);
      write(stem + ".md", md);
      out << md << "\n";
    } else {
      out << csv << "\n";
    }
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Categorical time series: DAR(1) fitting, independence tests and GLM comparison"};
  app.require_subcommand(1);
  Globals g;
  const std::map<std::string, Policy> policies{
      {"drop", Policy::Drop}, {"longest-segment", Policy::LongestSegment}, {"gap-aware", Policy::GapAware}};
  const std::map<std::string, Format> formats{{"csv", Format::Csv}, {"md", Format::Markdown}, {"txt", Format::Text}};
  app.add_option("--states", g.states, "State labels, one per line in ordinal order");
  app.add_option("--level", g.level, "Test level")->check(CLI::Range(0.0, 1.0));
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output file (output directory for reproduce-tables)");
  auto* policy_opt = app.add_option("--missing-policy", g.policy, "How tests treat missing values")
                         ->transform(CLI::CheckedTransformer(policies, CLI::ignore_case));
  app.add_option("--format", g.format, "Report format")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  double alpha = 0.0, beta = 0.0;
  std::vector<double> pi;
  std::size_t n = 0;
  auto* sim = app.add_subcommand("simulate", "Simulate a DAR(1) series, optionally with missing values");
  sim->add_option("--alpha", alpha, "Persistence in [0, 1)")->required();
  sim->add_option("--pi", pi, "Marginal distribution, comma separated")->required()->delimiter(',');
  sim->add_option("--n", n, "Index of the last value (n + 1 values)")->required()->check(CLI::PositiveNumber);
  sim->add_option("--beta", beta, "Missing probability in [0, 1)");

  std::vector<std::string> inputs;
  bool concat = false;
  auto* dar = app.add_subcommand("fit-dar", "Estimate DAR(1) parameters and run the independence tests");
  dar->add_option("inputs", inputs, "Series CSV files")->required()->check(CLI::ExistingFile);
  dar->add_flag("--concat", concat, "Analyse all inputs as one series");

  std::string family = "both";
  std::vector<int> lags{0, 1, 2};
  bool strict = false;
  auto* glm = app.add_subcommand("fit-glm", "Compare lagged GLMs by AIC");
  glm->add_option("inputs", inputs, "Series CSV files")->required()->check(CLI::ExistingFile);
  glm->add_flag("--concat", concat, "Analyse all inputs as one series");
  glm->add_option("--family", family, "categorical, ordinal or both")
      ->check(CLI::IsMember({"categorical", "ordinal", "both"}));
  glm->add_option("--lags", lags, "Lag orders, comma separated")->delimiter(',')->check(CLI::Range(0, 2));
  glm->add_flag("--strict-rows", strict, "Fit every lag on the rows usable by the largest lag");

  std::optional<double> alpha1;
  auto* tst = app.add_subcommand("test", "Independence tests only");
  tst->add_option("inputs", inputs, "Series CSV files")->required()->check(CLI::ExistingFile);
  tst->add_flag("--concat", concat, "Analyse all inputs as one series");
  tst->add_option("--alpha1", alpha1, "Alternative persistence for the longest-run power")->check(CLI::Range(0.0, 1.0));

  std::size_t m = 100;
  bool markdown = false;
  unsigned threads = 0;
  auto* rep = app.add_subcommand("reproduce-tables", "Run the estimator simulation study");
  rep->add_option("--m", m, "Replicates per cell")->check(CLI::PositiveNumber);
  rep->add_flag("--markdown", markdown, "Also emit markdown tables");
  rep->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");

  for (auto* sub : {sim, dar, glm, tst, rep}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*sim) return cmd_simulate(g, alpha, pi, n, beta, out, err);
    if (*dar) return cmd_fit_dar(g, inputs, concat, out);
    if (*glm) return cmd_fit_glm(g, policy_opt->count() > 0, inputs, concat, family, lags, strict, out);
    if (*tst) return cmd_test(g, inputs, concat, alpha1, out);
    if (*rep) return cmd_reproduce(g, m, markdown, threads, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace catseries::app
