#pragma once

#include <stdexcept>
#include <string>

namespace tlsgn {

enum class ErrorCode {
  dimension_mismatch,
  singular_matrix,
  rank_deficient,
  non_convergence,
  step_degenerate,
  hemisphere_violation,
  not_well_posed,
  trace_incompatible,
  insufficient_data,
  resample_cap_exceeded,
  invalid_argument,
  io_error,
  parse_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure reported by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by triangular solves; carries the zero-based index of the
/// offending diagonal entry.
class SingularMatrixError : public Error {
 public:
  SingularMatrixError(long index, double value);

  long index() const noexcept { return index_; }
  double value() const noexcept { return value_; }

 private:
  long index_;
  double value_;
};

}  // namespace tlsgn
