#pragma once

#include <stdexcept>
#include <string>

namespace bflab {

// Raised when a numerical procedure cannot reach its stated accuracy.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an estimator is handed too few samples to be meaningful.
class InsufficientData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a Kahler potential leaves the positive cone (h <= 0 somewhere).
class KahlerViolation : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

// Raised when a requested time cannot be served by a tabulated kernel.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace bflab
