#include "tlsgn/variational.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "tlsgn/error.hpp"

namespace tlsgn {

namespace {

void check_length(const ProblemData& problem, const Vector& x) {
  if (x.size() != problem.n())
    throw Error(ErrorCode::dimension_mismatch,
                "x has " + std::to_string(x.size()) + " entries, problem has n = " +
                    std::to_string(problem.n()));
}

}  // namespace

double scaling_factor(const Vector& x) {
  return 1.0 / std::sqrt(1.0 + x.squaredNorm());
}

Vector scaled_residual(const ProblemData& problem, const Vector& x) {
  check_length(problem, x);
  return scaling_factor(x) * (problem.a() * x - problem.b());
}

double backward_error(const ProblemData& problem, const Vector& x) {
  return scaled_residual(problem, x).norm();
}

VariationalPoint evaluate(const ProblemData& problem, const Vector& x) {
  check_length(problem, x);
  VariationalPoint p;
  p.x = x;
  p.mu = scaling_factor(x);
  p.residual = problem.a() * x - problem.b();
  p.f = p.mu * p.residual;
  p.eta = p.f.norm();
  const double mu3 = p.mu * p.mu * p.mu;
  p.jac = p.mu * problem.a();
  p.jac.noalias() -= (mu3 * p.residual) * x.transpose();
  p.grad_norm = (p.jac.transpose() * p.f).norm();
  return p;
}

std::optional<double> retraction_step(const VariationalPoint& point,
                                      const Vector& h) {
  const double denom = 1.0 - point.mu * point.mu * point.x.dot(h);
  if (!(std::abs(denom) > eps_alpha)) return std::nullopt;
  return 1.0 / denom;
}

StepComputation gauss_newton_decomposition(const VariationalPoint& point,
                                           const Vector& h) {
  if (h.size() != point.x.size())
    throw Error(ErrorCode::dimension_mismatch, "step length differs from x");
  if (!h.allFinite())
    throw Error(ErrorCode::invalid_argument, "step has non-finite entries");
  const auto alpha = retraction_step(point, h);
  if (!alpha)
    throw Error(ErrorCode::step_degenerate,
                "1 - mu^2 x'h vanished; step length undefined");

  const double mu2xh = point.mu * point.mu * point.x.dot(h);
  StepComputation out;
  out.h = h;
  out.theta = 1.0 / (1.0 + mu2xh);
  out.tau = scaling_factor(point.x + h) / point.mu * (1.0 + mu2xh);
  out.alpha = *alpha;
  return out;
}

Matrix BackwardPerturbation::e_bar() const {
  const Index n = right_.size() - 1;
  return left_ * right_.head(n).transpose();
}

Vector BackwardPerturbation::f_bar() const {
  return left_ * right_(right_.size() - 1);
}

BackwardPerturbation backward_certificate(const ProblemData& problem,
                                          const Vector& x) {
  check_length(problem, x);
  const Vector r = problem.a() * x - problem.b();
  Vector y(x.size() + 1);
  y.head(x.size()) = x;
  y(x.size()) = -1.0;
  // (E | f) = -r y' / y'y
  Vector left = -r / y.squaredNorm();
  return BackwardPerturbation(std::move(left), std::move(y));
}

EllipsoidMetric::EllipsoidMetric(const ProblemData& problem) {
  n_ = problem.n();
  linalg::SvdFactors svd;
  if (problem.m() > problem.n()) {
    const linalg::ThinQr qr = linalg::qr_factor(problem.c());
    svd = linalg::svd_factor(qr.r);
    q_ = qr.q;
  } else {
    // Square A: C is wide, factor it directly.
    svd = linalg::svd_factor(problem.c());
    q_ = Matrix::Identity(problem.m(), problem.m());
  }
  u_ = svd.u;
  sigma_ = svd.sigma;
  v_ = svd.v;
  const double cutoff = static_cast<double>(sigma_.size()) *
                        std::numeric_limits<double>::epsilon() * sigma_(0);
  rank_ = 0;
  for (Index i = 0; i < sigma_.size(); ++i)
    if (sigma_(i) > cutoff) ++rank_;
}

Vector EllipsoidMetric::pinv_apply(const Vector& v) const {
  Vector coords = u_.transpose() * (q_.transpose() * v);
  for (Index i = 0; i < coords.size(); ++i)
    coords(i) = i < rank_ ? coords(i) / sigma_(i) : 0.0;
  return v_ * coords;
}

double EllipsoidMetric::quadratic_form(const Vector& v) const {
  Vector coords = u_.transpose() * (q_.transpose() * v);
  double acc = 0.0;
  for (Index i = 0; i < rank_; ++i) {
    const double t = coords(i) / sigma_(i);
    acc += t * t;
  }
  return acc;
}

Vector lift_to_x(const EllipsoidMetric& metric, const Vector& f_point) {
  if (!metric.full_column_rank())
    throw Error(ErrorCode::rank_deficient,
                "lift_to_x needs C with full column rank");
  const Vector y = metric.pinv_apply(f_point);
  const Index n = metric.n();
  if (!(y(n) < -eps_hemisphere))
    throw Error(ErrorCode::hemisphere_violation,
                "last coordinate of C^+ f is " + std::to_string(y(n)) +
                    ", expected strictly negative");
  return -y.head(n) / y(n);
}

Vector lift_to_x(const ProblemData& problem, const Vector& f_point) {
  if (f_point.size() != problem.m())
    throw Error(ErrorCode::dimension_mismatch, "f has wrong length");
  return lift_to_x(EllipsoidMetric(problem), f_point);
}

}  // namespace tlsgn
