#include "catseries/series.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "catseries/error.hpp"

namespace catseries {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(pos)));
      return out;
    }
    out.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
}

}  // namespace

CatSeries::CatSeries(StateSpace space, std::vector<Code> obs, std::vector<std::string> time_labels)
    : space_(std::move(space)), obs_(std::move(obs)), time_labels_(std::move(time_labels)) {
  if (obs_.size() < 2) {
    throw Error(ErrorCode::TooShort, "a series needs at least two observations");
  }
  if (!time_labels_.empty() && time_labels_.size() != obs_.size()) {
    throw Error(ErrorCode::InvalidArgument, "time labels must match observation count");
  }
  for (const Code c : obs_) {
    if (!space_.valid(c)) {
      throw Error(ErrorCode::InvalidArgument, "code " + std::to_string(c) + " outside state space");
    }
  }
}

bool CatSeries::has_missing() const noexcept {
  return std::find(obs_.begin(), obs_.end(), kMissing) != obs_.end();
}

std::size_t CatSeries::observed_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(obs_.begin(), obs_.end(), [](Code c) { return c != kMissing; }));
}

CatSeries parse_series(std::string_view csv_text, const StateSpace& space) {
  std::vector<Code> codes;
  std::vector<std::string> stamps;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  // Strip a UTF-8 byte order mark.
  if (csv_text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;

  while (pos < csv_text.size()) {
    auto end = csv_text.find('\n', pos);
    if (end == std::string_view::npos) end = csv_text.size();
    const auto line = trim(csv_text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "t" || fields[1] != "value") {
        throw Error(ErrorCode::MalformedRow, "expected header 't,value' on line " + std::to_string(line_no));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCode::MalformedRow,
                  "line " + std::to_string(line_no) + ": expected 2 columns, got " + std::to_string(fields.size()));
    }
    stamps.emplace_back(fields[0]);
    if (fields[1] == "NA") {
      codes.push_back(kMissing);
    } else if (const auto c = space.code_of(fields[1])) {
      codes.push_back(*c);
    } else {
      throw Error(ErrorCode::UnknownLabel,
                  "line " + std::to_string(line_no) + ": '" + std::string(fields[1]) + "' is not a known label");
    }
  }
  if (!header_seen) throw Error(ErrorCode::MalformedRow, "missing header 't,value'");
  if (codes.size() < 2) throw Error(ErrorCode::TooShort, "fewer than 2 data rows");
  return CatSeries(space, std::move(codes), std::move(stamps));
}

CatSeries load_series(const std::string& path, const StateSpace& space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_series(buf.str(), space);
}

std::string serialize_series(const CatSeries& series) {
  std::string out = "t,value\n";
  const auto& stamps = series.time_labels();
  for (std::size_t t = 0; t < series.size(); ++t) {
    out += stamps.empty() ? std::to_string(t) : stamps[t];
    out += ',';
    out += series[t] == kMissing ? std::string("NA") : series.space().label(series[t]);
    out += '\n';
  }
  return out;
}

void save_series(const std::string& path, const CatSeries& series) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << serialize_series(series);
}

CatSeries drop_missing(const CatSeries& series) {
  std::vector<Code> codes;
  std::vector<std::string> stamps;
  const bool stamped = !series.time_labels().empty();
  for (std::size_t t = 0; t < series.size(); ++t) {
    if (series[t] == kMissing) continue;
    codes.push_back(series[t]);
    if (stamped) stamps.push_back(series.time_labels()[t]);
  }
  if (codes.size() < 2) throw Error(ErrorCode::TooShort, "fewer than 2 observed values");
  return CatSeries(series.space(), std::move(codes), std::move(stamps));
}

CatSeries longest_complete_segment(const CatSeries& series) {
  std::size_t best_start = 0, best_len = 0;
  std::size_t start = 0;
  for (std::size_t t = 0; t <= series.size(); ++t) {
    if (t == series.size() || series[t] == kMissing) {
      if (t - start > best_len) {
        best_len = t - start;
        best_start = start;
      }
      start = t + 1;
    }
  }
  if (best_len < 2) throw Error(ErrorCode::TooShort, "no complete segment of length 2");
  const auto codes = series.codes().subspan(best_start, best_len);
  std::vector<std::string> stamps;
  if (!series.time_labels().empty()) {
    const auto first = series.time_labels().begin() + static_cast<std::ptrdiff_t>(best_start);
    stamps.assign(first, first + static_cast<std::ptrdiff_t>(best_len));
  }
  return CatSeries(series.space(), {codes.begin(), codes.end()}, std::move(stamps));
}

CatSeries concatenate(std::span<const CatSeries> parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to concatenate");
  std::vector<Code> codes;
  std::vector<std::string> stamps;
  bool stamped = true;
  for (const auto& p : parts) {
    if (!(p.space() == parts.front().space())) {
      throw Error(ErrorCode::InvalidArgument, "series use different state spaces");
    }
    codes.insert(codes.end(), p.codes().begin(), p.codes().end());
    stamped = stamped && !p.time_labels().empty();
    if (stamped) stamps.insert(stamps.end(), p.time_labels().begin(), p.time_labels().end());
  }
  if (!stamped) stamps.clear();
  return CatSeries(parts.front().space(), std::move(codes), std::move(stamps));
}

TransitionCounts transition_counts(const CatSeries& series) {
  if (series.has_missing()) {
    throw Error(ErrorCode::MissingValuePresent, "transition counts need a complete series");
  }
  const auto k = static_cast<Eigen::Index>(series.k());
  TransitionCounts tc;
  tc.counts = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 1; i < series.size(); ++i) {
    ++tc.counts(series[i - 1] - 1, series[i] - 1);
  }
  tc.row_sums = tc.counts.rowwise().sum();
  tc.col_sums = tc.counts.colwise().sum().transpose();
  tc.total = tc.counts.sum();
  return tc;
}

bool EmpiricalTransitions::all_defined() const noexcept {
  return std::all_of(row_defined.begin(), row_defined.end(), [](bool b) { return b; });
}

EmpiricalTransitions empirical_transition_matrix(const TransitionCounts& tc) {
  const auto k = tc.counts.rows();
  EmpiricalTransitions et;
  et.p = Eigen::MatrixXd::Constant(k, k, std::numeric_limits<double>::quiet_NaN());
  et.row_defined.assign(static_cast<std::size_t>(k), false);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (tc.row_sums(j) == 0) continue;
    et.p.row(j) = tc.counts.row(j).cast<double>() / static_cast<double>(tc.row_sums(j));
    et.row_defined[static_cast<std::size_t>(j)] = true;
  }
  return et;
}

EmpiricalTransitions empirical_transition_matrix(const CatSeries& series) {
  return empirical_transition_matrix(transition_counts(series));
}

}  // namespace catseries
