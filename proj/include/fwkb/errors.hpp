#pragma once

#include <stdexcept>
#include <string>

namespace fwkb {

/// Base class for all engine errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Source text could not be parsed. Carries 1-based line/column.
struct ParseError : Error {
  int line;
  int column;
  ParseError(const std::string& msg, int line_, int col_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(col_) + ")"),
        line(line_),
        column(col_) {}
};

/// Input is well-formed but outside the supported structural class
/// (non-constant Hessian, non-separable Hamiltonian, forbidden atoms, ...).
struct UnsupportedError : Error {
  explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

/// A constant configuration that makes a closed form collapse
/// (division by a vanishing separation constant, empty allowed region).
struct DegenerateConstantError : UnsupportedError {
  explicit DegenerateConstantError(const std::string& msg)
      : UnsupportedError(msg) {}
};

/// Numeric evaluation failed: unbound atom or a point outside the
/// classically allowed region (negative radicand, |asin| > 1).
struct EvalError : Error {
  explicit EvalError(const std::string& msg) : Error(msg) {}
};

struct EvalDomainError : EvalError {
  explicit EvalDomainError(const std::string& msg) : EvalError(msg) {}
};

/// A numeric verification stage exceeded its tolerance or failed mid-run.
struct VerificationError : Error {
  explicit VerificationError(const std::string& msg) : Error(msg) {}
};

/// The wave function fails an operator condition both symbolically and
/// numerically.
struct QuantizationError : Error {
  explicit QuantizationError(const std::string& msg) : Error(msg) {}
};

}  // namespace fwkb
