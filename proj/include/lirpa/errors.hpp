#pragma once

#include <stdexcept>
#include <string>

namespace lirpa {

enum class ParseErrorKind {
  Syntax,
  UnknownOp,
  DimensionMismatch,
  Cycle,
  Output,
  InputOutOfRange,
  Perturbation,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

/// Math outside an op's domain: log of a non-positive value, exp overflow,
/// non-finite relaxation intervals.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an Exp pre-activation upper bound exceeds the configured cap.
class ExpOverflowError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Caller broke a documented precondition (shape mismatch, l > u, bad label).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lirpa
