#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tlsgn/error.hpp"
#include "tlsgn/probgen.hpp"
#include "tlsgn/variational.hpp"

using namespace tlsgn;

namespace {

ProblemData column_problem(double b0, double b1) {
  Matrix a(2, 1);
  a << 1, 0;
  Vector b(2);
  b << b0, b1;
  return ProblemData(a, b);
}

ProblemData random_problem(int m, int n, std::mt19937_64& rng) {
  return ProblemData(oracle::random_matrix(m, n, rng), oracle::random_vector(m, rng));
}

}  // namespace

TEST(ProblemData, AugmentedMatrixIsBitExact) {
  std::mt19937_64 rng(1);
  const ProblemData p = random_problem(6, 3, rng);
  EXPECT_TRUE((p.c().leftCols(3).array() == p.a().array()).all());
  EXPECT_TRUE((p.c().col(3).array() == p.b().array()).all());
  EXPECT_EQ(p.m(), 6);
  EXPECT_EQ(p.n(), 3);
}

TEST(ProblemData, RejectsBadShapes) {
  EXPECT_THROW(ProblemData(Matrix::Zero(2, 3), Vector::Zero(2)), Error);
  EXPECT_THROW(ProblemData(Matrix::Zero(3, 2), Vector::Zero(2)), Error);
  EXPECT_THROW(ProblemData(Matrix::Zero(3, 0), Vector::Zero(3)), Error);
  Matrix a = Matrix::Ones(3, 1);
  a(0, 0) = std::nan("");
  EXPECT_THROW(ProblemData(a, Vector::Zero(3)), Error);
}

TEST(Evaluate, OriginGivesNormOfB) {
  const VariationalPoint p = evaluate(column_problem(0, 1), Vector::Zero(1));
  EXPECT_EQ(p.mu, 1.0);
  EXPECT_NEAR(p.f(0), 0.0, 1e-15);
  EXPECT_NEAR(p.f(1), -1.0, 1e-15);
  EXPECT_NEAR(p.eta, 1.0, 1e-15);
}

TEST(Evaluate, GoldenFixtureAtOne) {
  const VariationalPoint p = evaluate(column_problem(1, 1), Vector::Ones(1));
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(p.mu, r, 1e-15);
  EXPECT_NEAR(p.f(0), 0.0, 1e-15);
  EXPECT_NEAR(p.f(1), -r, 1e-15);
  EXPECT_NEAR(p.eta, 0.70710678118654757, 1e-15);
  EXPECT_EQ(p.eta, p.f.norm());
}

TEST(Evaluate, ConsistentPoint) {
  std::mt19937_64 rng(2);
  const Matrix a = oracle::random_matrix(7, 3, rng);
  const Vector x = oracle::random_vector(3, rng);
  const ProblemData prob(a, a * x);
  const VariationalPoint p = evaluate(prob, x);
  EXPECT_LT(p.f.norm(), 1e-14);
  EXPECT_LT(p.eta, 1e-14);
  EXPECT_LT((p.jac - p.mu * a).norm(), 1e-14);
}

TEST(Evaluate, MuRange) {
  std::mt19937_64 rng(3);
  const ProblemData prob = random_problem(5, 2, rng);
  EXPECT_EQ(evaluate(prob, Vector::Zero(2)).mu, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double mu = evaluate(prob, oracle::random_vector(2, rng)).mu;
    EXPECT_GT(mu, 0.0);
    EXPECT_LT(mu, 1.0);
  }
}

TEST(Evaluate, DimensionMismatch) {
  EXPECT_THROW(evaluate(column_problem(1, 1), Vector::Zero(2)), Error);
}

TEST(Evaluate, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const ProblemData prob = random_problem(9, 4, rng);
  for (int i = 0; i < 20; ++i) {
    const Vector x = oracle::random_vector(4, rng);
    const Matrix fd = oracle::central_difference(
        [&](const Vector& y) -> Vector {
          return (prob.a() * y - prob.b()) / std::sqrt(1.0 + y.squaredNorm());
        },
        x, 1e-5 * (1.0 + x.norm()));
    const Matrix jac = evaluate(prob, x).jac;
    ASSERT_LE((jac - fd).norm() / jac.norm(), 1e-6);
  }
}

TEST(EllipsoidMembership, RandomPointsLieOnEllipsoid) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const ProblemData prob = random_problem(12, 3, rng);
    // (CC')^+ through an SVD of C computed by Eigen.
    Eigen::JacobiSVD<Matrix> svd(prob.c(), Eigen::ComputeThinU);
    for (int i = 0; i < 10; ++i) {
      const Vector x = 3.0 * oracle::random_vector(3, rng);
      const Vector f = evaluate(prob, x).f;
      const Vector coords =
          (svd.matrixU().transpose() * f).cwiseQuotient(svd.singularValues());
      ASSERT_NEAR(coords.squaredNorm(), 1.0, 1e-10);
      ASSERT_NEAR(EllipsoidMetric(prob).quadratic_form(f), 1.0, 1e-10);
    }
  }
}

TEST(BackwardCertificate, GoldenFixtureAtOne) {
  const ProblemData prob = column_problem(1, 1);
  const BackwardPerturbation bp = backward_certificate(prob, Vector::Ones(1));
  const Matrix e = bp.e_bar();
  const Vector f = bp.f_bar();
  EXPECT_NEAR(e(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(e(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(f(0), 0.0, 1e-15);
  EXPECT_NEAR(f(1), -0.5, 1e-15);
  EXPECT_NEAR(bp.frob_norm(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_LT(((prob.a() + e) * Vector::Ones(1) - (prob.b() + f)).norm(), 1e-15);
}

TEST(BackwardCertificate, ConsistentPointIsZero) {
  std::mt19937_64 rng(6);
  const Matrix a = oracle::random_matrix(6, 2, rng);
  const Vector x = oracle::random_vector(2, rng);
  const BackwardPerturbation bp = backward_certificate(ProblemData(a, a * x), x);
  EXPECT_LT(bp.augmented().norm(), 1e-14);
  EXPECT_LT(bp.frob_norm(), 1e-14);
}

TEST(BackwardCertificate, OriginCertificateIsMinusB) {
  std::mt19937_64 rng(7);
  const ProblemData prob = random_problem(5, 2, rng);
  const BackwardPerturbation bp = backward_certificate(prob, Vector::Zero(2));
  EXPECT_EQ(bp.e_bar().norm(), 0.0);
  EXPECT_LT((bp.f_bar() + prob.b()).norm(), 1e-15);
  EXPECT_NEAR(bp.frob_norm(), prob.b().norm(), 1e-14);
}

TEST(BackwardCertificate, InvariantsAndOptimality) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const ProblemData prob = random_problem(8, 3, rng);
    const Vector x = oracle::random_vector(3, rng);
    const BackwardPerturbation bp = backward_certificate(prob, x);
    const Matrix e = bp.e_bar();
    const Vector f = bp.f_bar();
    ASSERT_LT(((prob.a() + e) * x - (prob.b() + f)).norm(), 1e-12 * prob.c().norm());
    const double eta = oracle::eta(prob.a(), prob.b(), x);
    ASSERT_NEAR(bp.frob_norm(), eta, 1e-12);
    ASSERT_NEAR(bp.augmented().norm(), eta, 1e-12);
    Eigen::JacobiSVD<Matrix> svd(bp.augmented());
    ASSERT_LT(svd.singularValues()(1), 1e-12 * (1.0 + eta));
    for (int i = 0; i < 100; ++i) {
      const Matrix ec = oracle::random_matrix(8, 3, rng) * 0.3;
      const Vector fc = (prob.a() + ec) * x - prob.b();
      Matrix comp(8, 4);
      comp << ec, fc;
      ASSERT_GE(comp.norm(), eta - 1e-12);
    }
  }
}

TEST(Decomposition, OrthogonalStep) {
  Vector x(2), h(2);
  x << 1.0, 0.0;
  h << 0.0, 2.0;
  std::mt19937_64 rng(9);
  const ProblemData prob = random_problem(4, 2, rng);
  const VariationalPoint p = evaluate(prob, x);
  const StepComputation s = gauss_newton_decomposition(p, h);
  EXPECT_EQ(s.theta, 1.0);
  EXPECT_EQ(s.alpha, 1.0);
  EXPECT_NEAR(s.tau, scaling_factor(x + h) / p.mu, 1e-15);
}

TEST(Decomposition, TauEqualsCauchySchwarzRatio) {
  // tau^2 = (v'w)^2 / (v'v w'w) with v = (x, 1), w = (x + h, 1): it reaches 1
  // only for h = 0. A step parallel to x still gives tau^2 < 1.
  std::mt19937_64 rng(10);
  const ProblemData prob = random_problem(6, 3, rng);
  const Vector x = oracle::random_vector(3, rng);
  const VariationalPoint p = evaluate(prob, x);
  for (double c : {-0.5, 0.3, 2.0, 7.5}) {
    const Vector h = c * x;
    const StepComputation s = gauss_newton_decomposition(p, h);
    Vector v(4), w(4);
    v << x, 1.0;
    w << x + h, 1.0;
    const double cs = v.dot(w) * v.dot(w) / (v.squaredNorm() * w.squaredNorm());
    EXPECT_NEAR(s.tau * s.tau, cs, 1e-14) << c;
    EXPECT_LT(s.tau * s.tau, 1.0) << c;
  }
  EXPECT_EQ(gauss_newton_decomposition(p, Vector::Zero(3)).tau, 1.0);
}

TEST(Decomposition, IdentityHoldsComponentwise) {
  std::mt19937_64 rng(11);
  const ProblemData prob = random_problem(10, 5, rng);
  for (int i = 0; i < 20; ++i) {
    const Vector x = oracle::random_vector(5, rng);
    const Vector h = oracle::random_vector(5, rng);
    const VariationalPoint p = evaluate(prob, x);
    const StepComputation s = gauss_newton_decomposition(p, h);
    const Vector lhs = evaluate(prob, x + h).f;
    const Vector rhs = s.tau * (p.f + s.theta * (p.jac * h));
    ASSERT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + p.f.norm()));
    ASSERT_NEAR(s.theta * (1.0 + p.mu * p.mu * x.dot(h)), 1.0, 1e-14);
    ASSERT_LE(s.tau * s.tau, 1.0 + 1e-14);
  }
}

TEST(Decomposition, DegenerateStepLength) {
  std::mt19937_64 rng(12);
  const ProblemData prob = random_problem(5, 2, rng);
  Vector x(2);
  x << 1.0, 1.0;
  const VariationalPoint p = evaluate(prob, x);
  // mu^2 x'h = 1  <=>  x'h = 1 + x'x = 3
  const Vector h = x * 1.5;
  EXPECT_FALSE(retraction_step(p, h).has_value());
  try {
    gauss_newton_decomposition(p, h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::step_degenerate);
  }
}

TEST(TauBound, RandomPairs) {
  std::mt19937_64 rng(13);
  const ProblemData prob = random_problem(6, 4, rng);
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const Vector x = 2.0 * oracle::random_vector(4, rng);
    const Vector h = 2.0 * oracle::random_vector(4, rng);
    const VariationalPoint p = evaluate(prob, x);
    if (!retraction_step(p, h)) continue;
    worst = std::max(worst, gauss_newton_decomposition(p, h).tau);
  }
  EXPECT_LE(worst * worst, 1.0 + 1e-14);
}

TEST(LiftToX, OriginRoundTrip) {
  std::mt19937_64 rng(14);
  const ProblemData prob = random_problem(8, 3, rng);
  const Vector x = lift_to_x(prob, evaluate(prob, Vector::Zero(3)).f);
  EXPECT_LT(x.norm(), 1e-13);
}

TEST(LiftToX, RandomRoundTrip) {
  std::mt19937_64 rng(15);
  const ProblemData prob = random_problem(10, 4, rng);
  const EllipsoidMetric metric(prob);
  for (int i = 0; i < 10; ++i) {
    const Vector x = oracle::random_vector(4, rng);
    const Vector back = lift_to_x(metric, evaluate(prob, x).f);
    ASSERT_LT((back - x).norm(), 1e-12 * (1.0 + x.norm()));
  }
}

TEST(LiftToX, WrongHemisphere) {
  std::mt19937_64 rng(16);
  const ProblemData prob = random_problem(7, 2, rng);
  Vector s(3);
  s << 0.1, -0.2, 0.5;  // last coordinate of C^+ f is +0.5
  const Vector f = prob.c() * s;
  try {
    lift_to_x(prob, f);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::hemisphere_violation);
  }
}
