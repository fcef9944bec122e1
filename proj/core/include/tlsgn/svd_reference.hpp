#pragma once

#include "tlsgn/dense_linalg.hpp"
#include "tlsgn/error.hpp"
#include "tlsgn/problem.hpp"

namespace tlsgn {

/// Relative thresholds of the well-posedness test.
inline constexpr double tol_gamma = 1e-12;
inline constexpr double tol_gap = 1e-12;

/// SVD of C with the partition v_{n+1} = (v_hat', gamma)'. The last right
/// singular vector is oriented so that gamma <= 0.
struct SvdBundle {
  linalg::SvdFactors svd;
  double sigma_n = 0.0;
  double sigma_np1 = 0.0;
  Vector v_last;
  Vector v_hat;
  double gamma = 0.0;
  /// Left singular vector paired with v_last (C v_last = sigma_np1 u_last).
  Vector u_last;
  /// Smallest singular value of A.
  double sigma_prime_n = 0.0;

  double sigma_max() const { return svd.sigma(0); }
};

enum class Verdict { unique, non_generic, degenerate_gap };

const char* to_string(Verdict v) noexcept;

struct WellPosedness {
  bool gamma_nonzero = false;
  double gamma_margin = 0.0;  ///< |gamma|
  double gap = 0.0;           ///< sigma_n - sigma_{n+1}
  Verdict verdict = Verdict::degenerate_gap;
  /// sigma'_n > sigma_{n+1}; must agree with verdict == unique.
  bool interlacing_holds = false;
};

struct Analysis {
  SvdBundle bundle;
  WellPosedness well_posedness;
};

/// SVD of C and the existence/uniqueness verdict. A gap tie is reported
/// before the gamma test.
Analysis analyze(const ProblemData& problem);

struct TlsSolution {
  Vector x;
  double eta = 0.0;
};

class NotWellPosedError : public Error {
 public:
  explicit NotWellPosedError(const WellPosedness& wp);
  const WellPosedness& well_posedness() const noexcept { return wp_; }

 private:
  WellPosedness wp_;
};

/// x_TLS = -v_hat / gamma and eta(x_TLS). Throws NotWellPosedError unless
/// the verdict is unique.
TlsSolution solve_tls_svd(const ProblemData& problem);
TlsSolution solve_tls_svd(const ProblemData& problem, const Analysis& analysis);

}  // namespace tlsgn
