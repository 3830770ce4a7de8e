#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nblab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression text. `position` is the byte offset of the offending token.
class ParseError : public Error {
public:
  ParseError(std::size_t position, const std::string& message)
      : Error(message + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

/// Domain error while evaluating an expression (ln of nonpositive, division by zero, ...).
class EvalError : public Error {
public:
  using Error::Error;
};

/// Symbolic derivative requested through a kink (abs, min, max, piecewise).
class DifferentiationError : public Error {
public:
  using Error::Error;
};

/// The problem description violates its invariants (negative coefficients, bad exponents, ...).
class InvalidSpec : public Error {
public:
  using Error::Error;
};

/// Solver / tool configuration is inconsistent.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// A theorem's hypotheses fail for the given data, so the requested construction does not apply.
class HypothesisError : public Error {
public:
  using Error::Error;
};

/// Iterative parameter selection or linear solve failed.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

/// Not enough data to fit or analyse (e.g. a trajectory without blow-up growth).
class InsufficientData : public Error {
public:
  using Error::Error;
};

}  // namespace nblab
