#include "catseries/state_space.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "catseries/error.hpp"

namespace catseries {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::MissingValuePresent: return "MissingValuePresent";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::InsufficientTransitions: return "InsufficientTransitions";
    case ErrorCode::UndefinedTransitionRow: return "UndefinedTransitionRow";
    case ErrorCode::UnvisitedState: return "UnvisitedState";
    case ErrorCode::DegenerateDistribution: return "DegenerateDistribution";
    case ErrorCode::NoUsableRows: return "NoUsableRows";
    case ErrorCode::Separation: return "Separation";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::NonmonotoneCutpoints: return "NonmonotoneCutpoints";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

StateSpace::StateSpace(std::vector<std::string> labels, bool ordinal)
    : labels_(std::move(labels)), ordinal_(ordinal) {
  if (labels_.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a state space needs at least two categories");
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty() || l == "NA") {
      throw Error(ErrorCode::InvalidArgument, "label '" + l + "' is reserved or empty");
    }
    if (!seen.insert(l).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate label '" + l + "'");
    }
  }
}

StateSpace StateSpace::numbered(std::size_t k, bool ordinal) {
  std::vector<std::string> labels;
  labels.reserve(k);
  for (std::size_t j = 1; j <= k; ++j) labels.push_back(std::to_string(j));
  return StateSpace(std::move(labels), ordinal);
}

StateSpace StateSpace::parse(std::string_view text, bool ordinal) {
  std::vector<std::string> labels;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = trim(text.substr(pos, end - pos));
    if (!line.empty()) labels.emplace_back(line);
    pos = end + 1;
  }
  return StateSpace(std::move(labels), ordinal);
}

StateSpace StateSpace::load(const std::string& path, bool ordinal) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open states file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), ordinal);
}

const std::string& StateSpace::label(Code c) const {
  if (c < 1 || c > static_cast<Code>(size())) {
    throw Error(ErrorCode::InvalidArgument, "code " + std::to_string(c) + " outside 1..k");
  }
  return labels_[static_cast<std::size_t>(c - 1)];
}

std::optional<Code> StateSpace::code_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<Code>(it - labels_.begin()) + 1;
}

}  // namespace catseries
