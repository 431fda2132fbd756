#pragma once

#include <stdexcept>
#include <string>

namespace projbal {

/// Input outside the mathematical domain of an operation (non-PD metric, v = 0, divergent integral).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Eigenvalue clustering makes a subspace decomposition ambiguous.
class AmbiguityError : public std::runtime_error {
 public:
  explicit AmbiguityError(const std::string& what) : std::runtime_error(what) {}
};

/// Quadrature did not stabilise within the node-doubling cap.
class PrecisionError : public std::runtime_error {
 public:
  explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

/// A Gram matrix is too ill-conditioned to orthonormalise against.
class ConditioningError : public std::runtime_error {
 public:
  explicit ConditioningError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

/// No holomorphic sections at all (every summand degree negative).
class EmptySpaceError : public std::invalid_argument {
 public:
  explicit EmptySpaceError(const std::string& what) : std::invalid_argument(what) {}
};

/// h(k) is indefinite somewhere; carries the smallest k at which it is positive everywhere.
class ThresholdError : public std::runtime_error {
 public:
  ThresholdError(const std::string& what, int minimal_k) : std::runtime_error(what), minimal_k_(minimal_k) {}
  int minimal_k() const { return minimal_k_; }

 private:
  int minimal_k_;
};

/// Input the implementation deliberately does not handle (e.g. non-diagonal φ on a split bundle).
class UnsupportedInput : public std::invalid_argument {
 public:
  explicit UnsupportedInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Experiment configuration failed validation; `what()` lists the offending fields.
class SchemaError : public std::invalid_argument {
 public:
  explicit SchemaError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace projbal
