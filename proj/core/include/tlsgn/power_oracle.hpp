#pragma once

#include <span>
#include <vector>

#include "tlsgn/dense_linalg.hpp"
#include "tlsgn/gn_solver.hpp"
#include "tlsgn/problem.hpp"
#include "tlsgn/svd_reference.hpp"

namespace tlsgn {

/// One iterate of the normalized inverse power method on C'C.
struct PowerState {
  Vector s;            ///< unit (n+1)-vector
  Vector f;            ///< C s
  double beta = 1.0;   ///< 1 / ||(C'C)^{-1} s_prev||; 1 for a starting state
  int k = 0;
};

/// The explicit ellipsoid step: w = argmin_{s'w = 0} ||f + C w||, the
/// tangent point z = f + C w, and its radial retraction back onto the
/// ellipsoid.
struct EllipsoidStep {
  PowerState state;
  Vector w;
  Vector z;
};

/// Convergence-rate measurement against the target sigma_q u_q.
struct RateReport {
  double rho = 0.0;              ///< (sigma_q / sigma_{q-1})^2
  double fitted_rate_f = 0.0;    ///< geometric rate of ||f_k - sigma_q u_q||
  double fitted_rate_eta = 0.0;  ///< geometric rate of | ||f_k|| - sigma_q |
  int points_f = 0;              ///< samples inside the fitting window
  int points_eta = 0;
};

/// Rate fits use the tail of the decreasing run of relative deviations
/// (divided by sigma_1) that starts below rate_window_high. Once the run hits
/// the rounding floor, samples within rate_floor_margin of the floor's noise
/// level are dropped. The last rate_fit_points samples that remain are fitted.
inline constexpr double rate_window_high = 1e-2;
inline constexpr double rate_floor_margin = 100.0;
inline constexpr int rate_fit_points = 3;
inline constexpr int rate_min_points = 3;

class PowerOracle {
 public:
  /// Factors C once. Stepping throws rank_deficient unless C has full
  /// column rank.
  explicit PowerOracle(const ProblemData& problem);

  bool full_column_rank() const { return full_rank_; }

  /// State for a given unit vector s (k = 0, beta = 1).
  PowerState start(const Vector& s) const;
  /// Starting state s_0 = C^+ f_0 for a point f_0 = f(x_0) on the ellipsoid.
  PowerState start_from_residual(const Vector& f0) const;

  /// s' = (C'C)^{-1} s / ||(C'C)^{-1} s|| via two triangular solves on R.
  PowerState power_step(const PowerState& state) const;
  PowerState power_step(const Vector& s) const { return power_step(start(s)); }

  /// The same step computed geometrically through the constrained
  /// least-squares problem on the tangent space.
  EllipsoidStep ellipsoid_step_explicit(const PowerState& state) const;
  EllipsoidStep ellipsoid_step_explicit(const Vector& s) const {
    return ellipsoid_step_explicit(start(s));
  }

  /// `steps` power iterations from `initial`; the result holds steps + 1
  /// states including the initial one.
  std::vector<PowerState> run(const PowerState& initial, int steps) const;

  /// max_k ||f_k^GN - f_k^power|| with the power sequence started from
  /// C^+ f(x_0). For a consistent problem (sigma_{n+1} = 0, f(x_0) = 0) the
  /// power sequence is the constant f(x_0). Throws trace_incompatible when the run used fallback steps,
  /// was not in optimal mode or kept no residual history.
  double check_equivalence(const SolveResult& gn) const;
  double check_equivalence(std::span<const Vector> gn_residuals) const;

  const ProblemData& problem() const { return problem_; }

 private:
  ProblemData problem_;
  linalg::ThinQr qr_c_;
  bool full_rank_ = false;

  void require_full_rank() const;
};

/// Rates of f_k -> sigma_q u_q and ||f_k|| -> sigma_q from a sequence of
/// residual vectors, with u_q oriented so that u_q' f_0 > 0. Each rate is the
/// least-squares slope of log deviation over the pre-floor tail described
/// above. Throws insufficient_data on a degenerate gap or when fewer than
/// rate_min_points samples qualify.
RateReport measure_rates(std::span<const Vector> residuals, const SvdBundle& bundle);
RateReport measure_rates(std::span<const PowerState> states, const SvdBundle& bundle);

}  // namespace tlsgn
