#pragma once

#include <stdexcept>
#include <string>

namespace cqrma {

/// Input violates a documented precondition (quantile level outside (0,1),
/// empty candidate set, target out of range, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dimensions of related arguments do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File input/output failure; the message names the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An LP solve could not certify optimality.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& message, int iterations, double gap)
      : std::runtime_error(message), iterations(iterations), complementarity_gap(gap) {}

  int iterations;
  double complementarity_gap;
};

}  // namespace cqrma
