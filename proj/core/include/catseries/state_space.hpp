#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace catseries {

/// Category code used throughout the library: 1..k for observed states,
/// kMissing for an unobserved time point.
using Code = int;
inline constexpr Code kMissing = -1;

/// An ordered finite set of categories E = {1..k}. Labels are opaque text;
/// internal codes follow label order.
class StateSpace {
 public:
  /// Throws Error(InvalidArgument) when fewer than two labels are given or
  /// labels repeat.
  explicit StateSpace(std::vector<std::string> labels, bool ordinal = true);

  /// Labels "1".."k".
  static StateSpace numbered(std::size_t k, bool ordinal = true);

  /// One label per line; blank lines and surrounding whitespace are ignored.
  static StateSpace parse(std::string_view text, bool ordinal = true);
  static StateSpace load(const std::string& path, bool ordinal = true);

  std::size_t size() const noexcept { return labels_.size(); }
  bool ordinal() const noexcept { return ordinal_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  /// Label of code c (1-based).
  const std::string& label(Code c) const;
  std::optional<Code> code_of(std::string_view label) const;
  bool valid(Code c) const noexcept { return c == kMissing || (c >= 1 && c <= static_cast<Code>(size())); }

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  std::vector<std::string> labels_;
  bool ordinal_;
};

}  // namespace catseries
