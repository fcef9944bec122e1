#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace tlsgn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace linalg {

/// Relative Frobenius tolerance for factorization products.
inline constexpr double tol_factorization = 1e-12;

/// Thin QR factors M = QR. Q is m x n with orthonormal columns, R is n x n
/// upper triangular with explicitly stored zeros below the diagonal and a
/// nonnegative diagonal.
struct ThinQr {
  Matrix q;
  Matrix r;

  Index rows() const { return q.rows(); }
  Index cols() const { return r.cols(); }
  Matrix product() const { return q * r; }
};

/// Plane rotation acting on coordinates (i, j):
///   [ c  s ] [x_i]
///   [-s  c ] [x_j]
struct GivensRotation {
  Index i = 0;
  Index j = 1;
  double c = 1.0;
  double s = 0.0;

  /// Rotation that maps (a, b) on coordinates (i, j) to (r, 0).
  static GivensRotation zeroing(Index i, Index j, double a, double b);

  void apply(Eigen::Ref<Vector> x) const;
  void apply_transpose(Eigen::Ref<Vector> x) const;
};

/// Running flop tally used to audit kernel cost. One multiply or add is one
/// flop; a rotation applied to two vectors of length L counts 6L.
struct FlopCounter {
  std::uint64_t flops = 0;
  void add(std::uint64_t n) { flops += n; }
};

struct ConstrainedLsResult {
  Vector x_bar;
  /// Multiplier of the KKT system [A'A v; v' 0][x; lambda] = [A'b; 0].
  double lambda = 0.0;
  /// False when the constraint is inactive (v'x_LS == 0) and x_bar = x_LS.
  bool projector_applied = false;
};

struct SvdFactors {
  Matrix u;      ///< p x k, orthonormal columns
  Vector sigma;  ///< k values, descending, nonnegative
  Matrix v;      ///< q x k, orthonormal columns (square when p >= q)
};

/// Householder thin QR. Throws dimension_mismatch when rows < cols.
ThinQr qr_factor(const Matrix& m);

/// QR factors of A + u v' from the factors of A, using Givens rotations.
///
/// Q is kept thin: the component of u outside span(Q) is appended as an
/// extra orthonormal column, the rotations act on n+1 coordinates, and the
/// trailing column is dropped once R has been restored to triangular form.
/// Cost is O(mn + n^2).
ThinQr qr_rank_one_update(const ThinQr& qr, const Vector& u, const Vector& v,
                          FlopCounter* counter = nullptr);

/// Solves R x = rhs by back substitution.
Vector solve_upper(const Matrix& r, const Vector& rhs);
/// Solves R' x = rhs by forward substitution.
Vector solve_upper_transpose(const Matrix& r, const Vector& rhs);

/// Least-squares solution of M x ~ rhs from the thin QR of M.
Vector ls_solve(const ThinQr& qr, const Vector& rhs);

/// min ||A x - rhs|| subject to v'x = 0, via the oblique projector
/// x_bar = x_LS - (v'x_LS / v'(A'A)^{-1}v) (A'A)^{-1}v. (A'A)^{-1}v is
/// applied as two triangular solves against R.
ConstrainedLsResult constrained_ls_solve(const ThinQr& qr, const Vector& rhs,
                                         const Vector& v);
ConstrainedLsResult constrained_ls_solve(const Matrix& a, const Vector& rhs,
                                         const Vector& v);

/// Dense SVD, thin factors. Backed by Eigen's two-sided Jacobi SVD.
SvdFactors svd_factor(const Matrix& m);

/// Throws singular_matrix when some |R(i,i)| <= rel_tol * max_j |R(j,j)|.
void check_nonsingular(const Matrix& r, double rel_tol = 1e-13);

}  // namespace linalg
}  // namespace tlsgn
