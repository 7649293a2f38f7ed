#pragma once

#include <stdexcept>
#include <string>

namespace qsx {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on the arguments was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A quantity is undefined for the given input (e.g. diameter zero).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A construction produced something its own invariants forbid.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// A requested construction would exceed a resource guard.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Failure inside the extension pipeline, tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace qsx
