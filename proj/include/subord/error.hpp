#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace subord {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its documented domain (bad config, bad id).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: the computation itself could not meet its contract.
class NumericError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public NumericError {
 public:
  QuadratureError(const std::string& what, double achieved)
      : NumericError(what + " (achieved error estimate " + short_number(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  static std::string short_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  double achieved_;
};

class RangeError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// phi vanishes identically (or at 1), so it cannot be normalized.
class DegenerateError : public DomainError {
 public:
  using DomainError::DomainError;
};

class TruncationError : public NumericError {
 public:
  using NumericError::NumericError;
};

class BudgetError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A caller-supplied function broke the operation's contract.
class ContractError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A required certificate or hypothesis is missing.
class PreconditionError : public DomainError {
 public:
  using DomainError::DomainError;
};

class ReducibleChainError : public NumericError {
 public:
  using NumericError::NumericError;
};

// The following signal a broken implementation: the inequalities they guard
// are theorems.
class InequalityViolation : public NumericError {
 public:
  using NumericError::NumericError;
};

class DominanceViolation : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace subord
