#pragma once

#include "tlsgn/dense_linalg.hpp"

namespace tlsgn {

/// TLS data (A, b) together with the augmented matrix C = (A | b).
///
/// Construction validates m >= n >= 1, matching row counts and finite
/// entries; the object is immutable afterwards.
class ProblemData {
 public:
  ProblemData(Matrix a, Vector b);

  /// Splits an augmented matrix into A (all but the last column) and b.
  static ProblemData from_augmented(const Matrix& c);

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Matrix& c() const { return c_; }
  Index m() const { return a_.rows(); }
  Index n() const { return a_.cols(); }

 private:
  Matrix a_;
  Vector b_;
  Matrix c_;
};

}  // namespace tlsgn
