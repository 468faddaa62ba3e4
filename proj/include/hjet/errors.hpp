#ifndef HJET_ERRORS_HPP
#define HJET_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hjet {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Syntax or resolution failure while parsing an expression string.
/// `offset` is the byte position of the offending token.
struct ParseError : Error {
  ParseError(std::string message, std::size_t offset_)
      : Error(std::move(message)), offset(offset_) {}
  std::size_t offset = 0;
};

/// Construction-time arithmetic failure (division by an exact zero,
/// exponent out of the supported range, ...).
struct DomainError : Error {
  using Error::Error;
};

struct EvalError : Error {
  using Error::Error;
};

/// A free symbol of the expression has no binding in the environment.
struct UnboundSymbolError : EvalError {
  using EvalError::EvalError;
};

/// Evaluation produced inf or NaN (division by zero, log of a
/// non-positive number, ...).
struct NonFiniteError : EvalError {
  using EvalError::EvalError;
};

/// Numerical procedure failure: integration blow-up, Newton
/// non-convergence, singular Hessian, stencil too deep for the grid.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace hjet

#endif  // HJET_ERRORS_HPP
