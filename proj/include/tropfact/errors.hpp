#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tropfact {

// Shape, range and configuration violations.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of the numerical contract (CLI exit code 4).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bottom (or NaN / +inf) entry where a finite value is required.
class NonFiniteInput : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// rank_factorize called on a matrix whose numerical rank exceeds the target.
class InfeasibleRank : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Malformed input file. line() is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tropfact
