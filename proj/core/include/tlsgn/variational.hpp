#pragma once

#include <cmath>
#include <optional>

#include "tlsgn/dense_linalg.hpp"
#include "tlsgn/problem.hpp"

namespace tlsgn {

/// Below this magnitude the denominator 1 - mu^2 x'h of the retraction step
/// length is treated as vanished.
inline constexpr double eps_alpha = 1e-12;
/// Absolute tolerance for identities on unit-scale quantities.
inline constexpr double tol_residual = 1e-10;
/// Margin for the strictly negative last coordinate of C^+ f.
inline constexpr double eps_hemisphere = 1e-14;

/// Backward-error quantities at a candidate solution x.
///
///   mu(x)  = (1 + x'x)^{-1/2}
///   f(x)   = mu(x) (A x - b)
///   eta(x) = ||f(x)||
///   J(x)   = mu(x) A - mu(x)^3 (A x - b) x'
struct VariationalPoint {
  Vector x;
  double mu = 1.0;
  Vector residual;  ///< A x - b
  Vector f;
  double eta = 0.0;
  Matrix jac;
  double grad_norm = 0.0;  ///< ||J' f||
};

VariationalPoint evaluate(const ProblemData& problem, const Vector& x);

/// mu(x); never underflows to zero for finite x.
double scaling_factor(const Vector& x);

/// f(x) without the Jacobian.
Vector scaled_residual(const ProblemData& problem, const Vector& x);

/// eta(x) = ||Ax - b|| / sqrt(1 + x'x).
double backward_error(const ProblemData& problem, const Vector& x);

/// Decomposition f(x+h) = tau (f(x) + theta J(x) h) and the step length
/// alpha = 1 / (1 - mu^2 x'h) that makes f(x + alpha h) a radial scaling of
/// the Gauss-Newton point f(x) + J(x) h.
struct StepComputation {
  Vector h;
  double theta = 1.0;
  double tau = 1.0;
  double alpha = 1.0;
};

/// Throws step_degenerate when |1 - mu^2 x'h| <= eps_alpha.
StepComputation gauss_newton_decomposition(const VariationalPoint& point,
                                           const Vector& h);

/// alpha = 1 / (1 - mu^2 x'h), or nullopt when the denominator vanishes.
std::optional<double> retraction_step(const VariationalPoint& point,
                                      const Vector& h);

/// Rank-one perturbation (E | f) = left * right' with right = (x', -1)'.
/// It makes x an exact solution of (A + E) x = b + f and has Frobenius
/// norm eta(x), the smallest possible.
class BackwardPerturbation {
 public:
  BackwardPerturbation(Vector left, Vector right)
      : left_(std::move(left)), right_(std::move(right)) {}

  const Vector& left() const { return left_; }
  const Vector& right() const { return right_; }

  Matrix e_bar() const;
  Vector f_bar() const;
  /// The full m x (n+1) matrix (E | f).
  Matrix augmented() const { return left_ * right_.transpose(); }
  double frob_norm() const { return left_.norm() * right_.norm(); }

 private:
  Vector left_;
  Vector right_;
};

BackwardPerturbation backward_certificate(const ProblemData& problem,
                                          const Vector& x);

/// Action of C^+ and of the quadratic form v'(CC')^+ v, through the thin
/// QR of C followed by an SVD of its small triangular factor.
class EllipsoidMetric {
 public:
  explicit EllipsoidMetric(const ProblemData& problem);

  /// C^+ v.
  Vector pinv_apply(const Vector& v) const;
  /// v'(CC')^+ v.
  double quadratic_form(const Vector& v) const;
  /// |f'(CC')^+ f - 1|.
  double residual(const Vector& f) const { return std::abs(quadratic_form(f) - 1.0); }

  double sigma_max() const { return sigma_(0); }
  const Vector& singular_values() const { return sigma_; }
  bool full_column_rank() const { return rank_ == n_ + 1; }
  Index n() const { return n_; }

 private:
  Matrix q_;
  Matrix u_;
  Vector sigma_;
  Matrix v_;
  Index rank_ = 0;
  Index n_ = 0;
};

/// Inverse of x -> f(x): x = -(y_1..y_n) / y_{n+1} with y = C^+ f.
/// Throws hemisphere_violation when y_{n+1} >= -eps_hemisphere and
/// rank_deficient when C lacks full column rank.
Vector lift_to_x(const ProblemData& problem, const Vector& f_point);
Vector lift_to_x(const EllipsoidMetric& metric, const Vector& f_point);

}  // namespace tlsgn
