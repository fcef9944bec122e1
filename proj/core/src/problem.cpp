#include "tlsgn/problem.hpp"

#include <string>

#include "tlsgn/error.hpp"

namespace tlsgn {

ProblemData::ProblemData(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.cols() < 1)
    throw Error(ErrorCode::dimension_mismatch, "problem needs n >= 1 columns");
  if (a_.rows() < a_.cols())
    throw Error(ErrorCode::dimension_mismatch,
                "problem needs m >= n, got m = " + std::to_string(a_.rows()) +
                    ", n = " + std::to_string(a_.cols()));
  if (b_.size() != a_.rows())
    throw Error(ErrorCode::dimension_mismatch,
                "b has " + std::to_string(b_.size()) + " entries, A has " +
                    std::to_string(a_.rows()) + " rows");
  if (!a_.allFinite() || !b_.allFinite())
    throw Error(ErrorCode::invalid_argument, "problem data must be finite");
  c_.resize(a_.rows(), a_.cols() + 1);
  c_.leftCols(a_.cols()) = a_;
  c_.col(a_.cols()) = b_;
}

ProblemData ProblemData::from_augmented(const Matrix& c) {
  if (c.cols() < 2)
    throw Error(ErrorCode::dimension_mismatch,
                "augmented matrix needs at least two columns");
  return ProblemData(c.leftCols(c.cols() - 1), c.col(c.cols() - 1));
}

}  // namespace tlsgn
