#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "catseries/state_space.hpp"

namespace catseries {

/// A categorical series X_0..X_n over a StateSpace. Immutable once built.
class CatSeries {
 public:
  /// Throws Error(TooShort) for fewer than two observations and
  /// Error(InvalidArgument) for codes outside {-1} ∪ {1..k}. time_labels is
  /// either empty or the same length as obs.
  CatSeries(StateSpace space, std::vector<Code> obs, std::vector<std::string> time_labels = {});

  const StateSpace& space() const noexcept { return space_; }
  std::size_t k() const noexcept { return space_.size(); }
  std::size_t size() const noexcept { return obs_.size(); }
  /// Index of the last observation, i.e. the number of transitions.
  std::size_t n() const noexcept { return obs_.size() - 1; }

  std::span<const Code> codes() const noexcept { return obs_; }
  Code operator[](std::size_t t) const noexcept { return obs_[t]; }
  const std::vector<std::string>& time_labels() const noexcept { return time_labels_; }

  bool has_missing() const noexcept;
  std::size_t observed_count() const noexcept;
  std::size_t missing_count() const noexcept { return size() - observed_count(); }

 private:
  StateSpace space_;
  std::vector<Code> obs_;
  std::vector<std::string> time_labels_;
};

/// Reads `t,value` CSV. Values are labels of `space` or the literal NA.
CatSeries parse_series(std::string_view csv_text, const StateSpace& space);
CatSeries load_series(const std::string& path, const StateSpace& space);

/// Inverse of parse_series. Rows without time labels are stamped 0..n.
std::string serialize_series(const CatSeries& series);
void save_series(const std::string& path, const CatSeries& series);

/// Removes missing observations and joins the remaining values.
/// Throws Error(TooShort) when fewer than two observations remain.
CatSeries drop_missing(const CatSeries& series);

/// Longest run of consecutive non-missing observations (first one on ties).
CatSeries longest_complete_segment(const CatSeries& series);

/// Joins several series over the same state space end to end.
CatSeries concatenate(std::span<const CatSeries> parts);

struct TransitionCounts {
  Eigen::MatrixXi counts;    ///< counts(j, j') = #{i : X_{i-1}=j+1, X_i=j'+1}
  Eigen::VectorXi row_sums;  ///< N_{j,.}
  Eigen::VectorXi col_sums;  ///< N_{.,j'}
  int total = 0;
};

/// Throws Error(MissingValuePresent) if the series has gaps.
TransitionCounts transition_counts(const CatSeries& series);

/// Row-normalised transition counts. Rows of states never left hold NaN
/// and are marked undefined.
struct EmpiricalTransitions {
  Eigen::MatrixXd p;
  std::vector<bool> row_defined;

  bool all_defined() const noexcept;
};

EmpiricalTransitions empirical_transition_matrix(const CatSeries& series);
EmpiricalTransitions empirical_transition_matrix(const TransitionCounts& counts);

}  // namespace catseries
