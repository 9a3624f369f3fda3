#pragma once

#include <stdexcept>
#include <string>

namespace phw {

/// Base class of every error thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact rational arithmetic left the 64-bit range.
struct OverflowError : Error {
  using Error::Error;
};

/// A total derivative would push a jet coordinate past the model's
/// configured maximum order.
struct JetOrderError : Error {
  using Error::Error;
};

/// Text could not be parsed.  Positions are 1-based; column 0 means
/// "whole line".
struct ParseError : Error {
  int line;
  int col;
  ParseError(const std::string& msg, int line_, int col_)
      : Error("parse error at " + std::to_string(line_) + ":" +
              std::to_string(col_) + ": " + msg),
        line(line_),
        col(col_) {}
};

/// Numeric evaluation failed: a symbol had no binding or a function was
/// evaluated outside its domain.
struct EvalError : Error {
  using Error::Error;
};

/// An operand had the wrong shape (component count, matrix size,
/// jet order) for the requested operation.
struct ShapeError : Error {
  using Error::Error;
};

/// A simulation could not be built or could not proceed (unsupported
/// operator structure, Newton non-convergence, non-finite state).
struct SimError : Error {
  using Error::Error;
};

}  // namespace phw
