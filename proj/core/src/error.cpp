#include "tlsgn/error.hpp"

#include <sstream>

namespace tlsgn {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::singular_matrix: return "singular_matrix";
    case ErrorCode::rank_deficient: return "rank_deficient";
    case ErrorCode::non_convergence: return "non_convergence";
    case ErrorCode::step_degenerate: return "step_degenerate";
    case ErrorCode::hemisphere_violation: return "hemisphere_violation";
    case ErrorCode::not_well_posed: return "not_well_posed";
    case ErrorCode::trace_incompatible: return "trace_incompatible";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::resample_cap_exceeded: return "resample_cap_exceeded";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::parse_error: return "parse_error";
  }
  return "unknown";
}

namespace {

std::string singular_message(long index, double value) {
  std::ostringstream os;
  os << "triangular factor is singular: |R(" << index << "," << index
     << ")| = " << value;
  return os.str();
}

}  // namespace

SingularMatrixError::SingularMatrixError(long index, double value)
    : Error(ErrorCode::singular_matrix, singular_message(index, value)),
      index_(index),
      value_(value) {}

}  // namespace tlsgn
