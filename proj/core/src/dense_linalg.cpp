#include "tlsgn/dense_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "tlsgn/error.hpp"

namespace tlsgn::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string dims(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

// Flip signs so that every diagonal entry of R is nonnegative.
void normalize_signs(ThinQr& qr) {
  for (Index i = 0; i < qr.r.rows(); ++i) {
    if (qr.r(i, i) < 0.0) {
      qr.r.row(i) *= -1.0;
      qr.q.col(i) *= -1.0;
    }
  }
}

void zero_below_diagonal(Matrix& r) {
  for (Index j = 0; j < r.cols(); ++j)
    for (Index i = j + 1; i < r.rows(); ++i) r(i, j) = 0.0;
}

// Rotate rows (g.i, g.j) of M over columns [first, M.cols()).
void rotate_rows(Matrix& m, const GivensRotation& g, Index first) {
  for (Index col = first; col < m.cols(); ++col) {
    const double a = m(g.i, col);
    const double b = m(g.j, col);
    m(g.i, col) = g.c * a + g.s * b;
    m(g.j, col) = -g.s * a + g.c * b;
  }
}

// Q <- Q G' restricted to columns (g.i, g.j).
void rotate_cols(Matrix& q, const GivensRotation& g) {
  for (Index row = 0; row < q.rows(); ++row) {
    const double a = q(row, g.i);
    const double b = q(row, g.j);
    q(row, g.i) = g.c * a + g.s * b;
    q(row, g.j) = -g.s * a + g.c * b;
  }
}

// A unit vector orthogonal to the columns of q (q must have fewer columns
// than rows). Picks the canonical direction least represented in span(q).
Vector orthogonal_complement_vector(const Matrix& q) {
  const Vector leverage = q.rowwise().squaredNorm();
  Index best = 0;
  leverage.minCoeff(&best);
  Vector e = Vector::Zero(q.rows());
  e(best) = 1.0;
  for (int pass = 0; pass < 2; ++pass) e -= q * (q.transpose() * e);
  return e / e.norm();
}

}  // namespace

GivensRotation GivensRotation::zeroing(Index i, Index j, double a, double b) {
  GivensRotation g;
  g.i = i;
  g.j = j;
  if (b == 0.0) return g;
  const double r = std::hypot(a, b);
  g.c = a / r;
  g.s = b / r;
  return g;
}

void GivensRotation::apply(Eigen::Ref<Vector> x) const {
  const double a = x(i);
  const double b = x(j);
  x(i) = c * a + s * b;
  x(j) = -s * a + c * b;
}

void GivensRotation::apply_transpose(Eigen::Ref<Vector> x) const {
  const double a = x(i);
  const double b = x(j);
  x(i) = c * a - s * b;
  x(j) = s * a + c * b;
}

ThinQr qr_factor(const Matrix& m) {
  const Index rows = m.rows();
  const Index cols = m.cols();
  if (rows < cols)
    throw Error(ErrorCode::dimension_mismatch,
                "qr_factor needs rows >= cols, got " + dims(rows, cols));

  Matrix work = m;
  Matrix reflectors = Matrix::Zero(rows, cols);
  Vector betas = Vector::Zero(cols);

  for (Index j = 0; j < cols; ++j) {
    const Index len = rows - j;
    Vector x = work.col(j).tail(len);
    const double norm_x = x.norm();
    if (norm_x == 0.0) continue;
    const double alpha = x(0) >= 0.0 ? -norm_x : norm_x;
    x(0) -= alpha;
    const double vtv = x.squaredNorm();
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;
    auto block = work.bottomRightCorner(len, cols - j);
    block.noalias() -= (beta * x) * (x.transpose() * block);
    work.col(j).tail(len - 1).setZero();
    work(j, j) = alpha;
    reflectors.col(j).tail(len) = x;
    betas(j) = beta;
  }

  ThinQr out;
  out.r = work.topRows(cols);
  zero_below_diagonal(out.r);

  out.q = Matrix::Identity(rows, cols);
  for (Index j = cols - 1; j >= 0; --j) {
    if (betas(j) == 0.0) continue;
    const Index len = rows - j;
    const Vector v = reflectors.col(j).tail(len);
    auto block = out.q.bottomRows(len);
    block.noalias() -= (betas(j) * v) * (v.transpose() * block);
  }
  normalize_signs(out);
  return out;
}

ThinQr qr_rank_one_update(const ThinQr& qr, const Vector& u, const Vector& v,
                          FlopCounter* counter) {
  const Index m = qr.q.rows();
  const Index n = qr.r.cols();
  if (qr.q.cols() != n || qr.r.rows() != n || u.size() != m || v.size() != n)
    throw Error(ErrorCode::dimension_mismatch,
                "qr_rank_one_update: Q " + dims(qr.q.rows(), qr.q.cols()) +
                    ", R " + dims(qr.r.rows(), qr.r.cols()) + ", u " +
                    std::to_string(u.size()) + ", v " +
                    std::to_string(v.size()));

  FlopCounter local;
  FlopCounter& flops = counter ? *counter : local;
  const auto um = static_cast<std::uint64_t>(m);
  const auto un = static_cast<std::uint64_t>(n);

  // w = Q'u, so that A + uv' = Q(R + wv') + (u - Qw)v'.
  Vector w = qr.q.transpose() * u;
  flops.add(2 * um * un);

  const bool extend = m > n;
  const Index k = extend ? n + 1 : n;
  Matrix qk(m, k);
  qk.leftCols(n) = qr.q;
  Matrix rk = Matrix::Zero(k, n);
  rk.topRows(n) = qr.r;
  Vector wk(k);

  if (extend) {
    Vector resid = u - qr.q * w;
    flops.add(2 * um * un + um);
    // Reorthogonalize until the residual stops shrinking sharply.
    for (int pass = 0; pass < 3; ++pass) {
      const double before = resid.norm();
      const Vector corr = qr.q.transpose() * resid;
      resid -= qr.q * corr;
      w += corr;
      flops.add(4 * um * un + un);
      if (resid.norm() > 0.5 * before) break;
    }
    double rho = resid.norm();
    Vector extra;
    if (rho > 16.0 * kEps * static_cast<double>(m) * u.norm() && rho > 0.0) {
      extra = resid / rho;
    } else {
      extra = orthogonal_complement_vector(qr.q);
      rho = extra.dot(resid);
    }
    qk.col(n) = extra;
    wk.head(n) = w;
    wk(n) = rho;
  } else {
    wk = w;
  }

  // Rotations J on coordinates (i-1, i), bottom-up: wk -> +-||wk|| e1, and
  // R picks up one subdiagonal, i.e. becomes upper Hessenberg.
  for (Index i = k - 1; i >= 1; --i) {
    const GivensRotation g = GivensRotation::zeroing(i - 1, i, wk(i - 1), wk(i));
    g.apply(wk);
    wk(i) = 0.0;
    const Index first = std::min(i - 1, n);
    rotate_rows(rk, g, first);
    rotate_cols(qk, g);
    flops.add(6 * static_cast<std::uint64_t>(n - first) + 6 * um + 6);
  }

  // H1 = H + (+-||w||) e1 v'.
  rk.row(0) += wk(0) * v.transpose();
  flops.add(2 * un);

  // Rotations G on coordinates (i, i+1), top-down, restore triangular form.
  const Index sweeps = std::min(n, k - 1);
  for (Index i = 0; i < sweeps; ++i) {
    const GivensRotation g = GivensRotation::zeroing(i, i + 1, rk(i, i), rk(i + 1, i));
    rotate_rows(rk, g, i);
    rk(i + 1, i) = 0.0;
    rotate_cols(qk, g);
    flops.add(6 * static_cast<std::uint64_t>(n - i) + 6 * um + 6);
  }

  ThinQr out;
  out.q = qk.leftCols(n);
  out.r = rk.topRows(n);
  zero_below_diagonal(out.r);
  normalize_signs(out);
  return out;
}

void check_nonsingular(const Matrix& r, double rel_tol) {
  const Index n = r.cols();
  if (n == 0) return;
  const double scale = r.diagonal().cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    const double d = std::abs(r(i, i));
    if (!(d > rel_tol * scale) || d == 0.0)
      throw SingularMatrixError(static_cast<long>(i), r(i, i));
  }
}

Vector solve_upper(const Matrix& r, const Vector& rhs) {
  const Index n = r.cols();
  if (r.rows() != n || rhs.size() != n)
    throw Error(ErrorCode::dimension_mismatch,
                "solve_upper: R " + dims(r.rows(), r.cols()) + ", rhs " +
                    std::to_string(rhs.size()));
  check_nonsingular(r);
  Vector x = rhs;
  for (Index i = n - 1; i >= 0; --i) {
    double s = x(i);
    for (Index j = i + 1; j < n; ++j) s -= r(i, j) * x(j);
    x(i) = s / r(i, i);
  }
  return x;
}

Vector solve_upper_transpose(const Matrix& r, const Vector& rhs) {
  const Index n = r.cols();
  if (r.rows() != n || rhs.size() != n)
    throw Error(ErrorCode::dimension_mismatch,
                "solve_upper_transpose: R " + dims(r.rows(), r.cols()) +
                    ", rhs " + std::to_string(rhs.size()));
  check_nonsingular(r);
  Vector x = rhs;
  for (Index i = 0; i < n; ++i) {
    double s = x(i);
    for (Index j = 0; j < i; ++j) s -= r(j, i) * x(j);
    x(i) = s / r(i, i);
  }
  return x;
}

Vector ls_solve(const ThinQr& qr, const Vector& rhs) {
  if (rhs.size() != qr.q.rows())
    throw Error(ErrorCode::dimension_mismatch,
                "ls_solve: rhs has " + std::to_string(rhs.size()) +
                    " entries, factor has " + std::to_string(qr.q.rows()) +
                    " rows");
  return solve_upper(qr.r, qr.q.transpose() * rhs);
}

ConstrainedLsResult constrained_ls_solve(const ThinQr& qr, const Vector& rhs,
                                         const Vector& v) {
  if (v.size() != qr.r.cols())
    throw Error(ErrorCode::dimension_mismatch,
                "constrained_ls_solve: constraint vector has " +
                    std::to_string(v.size()) + " entries, expected " +
                    std::to_string(qr.r.cols()));
  if (v.squaredNorm() == 0.0)
    throw Error(ErrorCode::invalid_argument,
                "constrained_ls_solve: constraint vector is zero");

  ConstrainedLsResult out;
  const Vector x_ls = ls_solve(qr, rhs);
  // w = (A'A)^{-1} v = R^{-1} R^{-T} v
  const Vector w = solve_upper(qr.r, solve_upper_transpose(qr.r, v));
  const double vtw = v.dot(w);
  const double vtx = v.dot(x_ls);
  out.lambda = vtx / vtw;
  out.x_bar = x_ls - out.lambda * w;
  out.projector_applied = vtx != 0.0;
  return out;
}

ConstrainedLsResult constrained_ls_solve(const Matrix& a, const Vector& rhs,
                                         const Vector& v) {
  return constrained_ls_solve(qr_factor(a), rhs, v);
}

SvdFactors svd_factor(const Matrix& m) {
  if (!m.allFinite())
    throw Error(ErrorCode::invalid_argument, "svd_factor: non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    throw Error(ErrorCode::non_convergence,
                "svd_factor: Jacobi sweeps did not converge for " +
                    dims(m.rows(), m.cols()) + " matrix");
  return SvdFactors{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

}  // namespace tlsgn::linalg
