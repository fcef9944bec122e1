#include "tlsgn/svd_reference.hpp"

#include <cmath>
#include <string>

#include "tlsgn/variational.hpp"

namespace tlsgn {

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::unique: return "unique";
    case Verdict::non_generic: return "non_generic";
    case Verdict::degenerate_gap: return "degenerate_gap";
  }
  return "unknown";
}

namespace {

std::string describe(const WellPosedness& wp) {
  return std::string("TLS problem is not well posed: ") + to_string(wp.verdict) +
         " (|gamma| = " + std::to_string(wp.gamma_margin) +
         ", sigma_n - sigma_n+1 = " + std::to_string(wp.gap) + ")";
}

}  // namespace

NotWellPosedError::NotWellPosedError(const WellPosedness& wp)
    : Error(ErrorCode::not_well_posed, describe(wp)), wp_(wp) {}

Analysis analyze(const ProblemData& problem) {
  const Index n = problem.n();
  Analysis out;
  SvdBundle& b = out.bundle;

  // With m == n the factorization of the wide C has only n singular values;
  // the missing sigma_{n+1} is zero and its right vector spans null(C).
  if (problem.m() > n) {
    b.svd = linalg::svd_factor(problem.c());
  } else {
    const linalg::SvdFactors wide = linalg::svd_factor(problem.c());
    Eigen::JacobiSVD<Matrix> full(problem.c(), Eigen::ComputeFullV);
    b.svd.u = Matrix::Zero(problem.m(), n + 1);
    b.svd.u.leftCols(wide.u.cols()) = wide.u;
    b.svd.sigma = Vector::Zero(n + 1);
    b.svd.sigma.head(wide.sigma.size()) = wide.sigma;
    b.svd.v = full.matrixV();
  }

  b.sigma_n = b.svd.sigma(n - 1);
  b.sigma_np1 = b.svd.sigma(n);
  b.v_last = b.svd.v.col(n);
  b.u_last = b.svd.u.col(n);
  if (b.v_last(n) > 0.0) {
    b.v_last = -b.v_last;
    b.u_last = -b.u_last;
  }
  b.v_hat = b.v_last.head(n);
  b.gamma = b.v_last(n);
  b.sigma_prime_n = linalg::svd_factor(problem.a()).sigma(n - 1);

  WellPosedness& wp = out.well_posedness;
  const double sigma1 = b.svd.sigma(0);
  wp.gamma_margin = std::abs(b.gamma);
  wp.gamma_nonzero = wp.gamma_margin > tol_gamma * b.v_last.norm();
  wp.gap = b.sigma_n - b.sigma_np1;
  if (!(wp.gap > tol_gap * sigma1))
    wp.verdict = Verdict::degenerate_gap;
  else if (!wp.gamma_nonzero)
    wp.verdict = Verdict::non_generic;
  else
    wp.verdict = Verdict::unique;
  wp.interlacing_holds = b.sigma_prime_n > b.sigma_np1;
  return out;
}

TlsSolution solve_tls_svd(const ProblemData& problem, const Analysis& analysis) {
  if (analysis.well_posedness.verdict != Verdict::unique)
    throw NotWellPosedError(analysis.well_posedness);
  const SvdBundle& b = analysis.bundle;
  TlsSolution out;
  out.x = -b.v_hat / b.gamma;
  out.eta = backward_error(problem, out.x);
  return out;
}

TlsSolution solve_tls_svd(const ProblemData& problem) {
  return solve_tls_svd(problem, analyze(problem));
}

}  // namespace tlsgn
