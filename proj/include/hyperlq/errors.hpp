#pragma once

#include <stdexcept>
#include <string>

namespace hyperlq {

/// Sizes of inputs do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument lies outside the admissible set (nonpositive frequency, a >= b, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computed object failed an internal cross-check, e.g. a missed secular root.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Some mode is neither controllable nor free of cost.
class StabilizabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The selected solver method did not converge.
class MethodError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hyperlq
