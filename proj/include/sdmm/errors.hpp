#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sdmm {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible. Carries both shapes in the message.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t lhs_rows, std::size_t lhs_cols,
                 std::size_t rhs_rows, std::size_t rhs_cols)
      : Error(what + " (lhs " + std::to_string(lhs_rows) + "x" + std::to_string(lhs_cols) +
              ", rhs " + std::to_string(rhs_rows) + "x" + std::to_string(rhs_cols) + ")"),
        lhs_rows(lhs_rows),
        lhs_cols(lhs_cols),
        rhs_rows(rhs_rows),
        rhs_cols(rhs_cols) {}

  std::size_t lhs_rows, lhs_cols, rhs_rows, rhs_cols;
};

/// Invalid argument value (duplicate points, non-divisible split, bad parameters, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A linear system is singular or too ill-conditioned to solve.
class SingularSystemError : public Error {
 public:
  SingularSystemError(const std::string& what, double condition_estimate)
      : Error(what + " (condition estimate " + std::to_string(condition_estimate) + ")"),
        condition_estimate(condition_estimate) {}

  double condition_estimate;
};

/// Decoding was attempted with fewer responses than the recovery threshold.
class NotEnoughResponses : public Error {
 public:
  NotEnoughResponses(std::size_t got, std::size_t need)
      : Error("not enough responses: got " + std::to_string(got) + ", need " +
              std::to_string(need)),
        got(got),
        need(need) {}

  std::size_t got;
  std::size_t need;
};

/// File or stream I/O failure. Carries the offending path when known.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Wire protocol violation (bad frame, unexpected type, remote error frame).
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what, int code = 0) : Error(what), code(code) {}

  int code;
};

}  // namespace sdmm
