#pragma once

#include <stdexcept>
#include <string>

namespace logitrank {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller supplied something that violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file could not be parsed: bad magic, version, checksum, or shape.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured budget.
class EnumerationInfeasible : public Error {
 public:
  using Error::Error;
};

// A numerical or structural invariant failed at run time. The name
// identifies the invariant so that reports can quote it.
class InvariantViolation : public Error {
 public:
  InvariantViolation(std::string invariant, const std::string& detail)
      : Error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

}  // namespace logitrank
