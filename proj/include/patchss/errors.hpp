#pragma once

#include <stdexcept>
#include <string>

namespace patchss {

/// Argument outside the domain where an operation is defined (u < 0, E out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical procedure did not reach its requested accuracy.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved = 0.0)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Root finder was handed an interval without a sign change.
class BracketError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A monotonicity or uniqueness property the construction relies on was observed to fail.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace patchss
