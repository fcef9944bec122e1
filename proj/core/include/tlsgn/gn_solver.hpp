#pragma once

#include <optional>
#include <span>
#include <vector>

#include "tlsgn/dense_linalg.hpp"
#include "tlsgn/problem.hpp"
#include "tlsgn/variational.hpp"

namespace tlsgn {

enum class StepMode { basic, optimal };
enum class SubproblemMode { fresh_qr, rank_one_update };
enum class SolveStatus { converged, maxit_reached, stagnated_rounding, step_degenerate };

const char* to_string(StepMode m) noexcept;
const char* to_string(SubproblemMode m) noexcept;
const char* to_string(SolveStatus s) noexcept;

/// Solver settings. Unset optional fields are resolved against sigma_1(C):
/// epsilon = epsilon_rel * sigma_1^2, eta_slack = eta_slack_rel * sigma_1, and
/// eta_guard is on in optimal mode and off in basic mode.
struct SolverConfig {
  std::optional<double> epsilon;
  double epsilon_rel = 1e-10;
  int maxit = 200;
  StepMode step_mode = StepMode::optimal;
  SubproblemMode subproblem_mode = SubproblemMode::rank_one_update;
  std::optional<bool> eta_guard;
  /// Increase of eta tolerated before the guard fires.
  std::optional<double> eta_slack;
  double eta_slack_rel = 1e-13;
  /// Keep f(x_k) for every accepted iterate in SolveResult::residuals.
  bool keep_residuals = true;

  /// Copy with every optional filled in; throws invalid_argument when
  /// epsilon <= 0 or maxit < 1.
  SolverConfig resolved(double sigma_max) const;
};

/// One row per evaluated iterate x_k. Step columns describe the move from
/// x_k to x_{k+1} and are NaN on the final row.
struct IterationRecord {
  int k = 0;
  double eta = 0.0;
  double grad_norm = 0.0;
  double alpha = 0.0;
  double step_norm = 0.0;  ///< ||h_k||
  double ellipsoid_residual = 0.0;
  double orthogonality_residual = 0.0;
  double tau = 0.0;
  bool fallback = false;
  /// ||f(x_{k+1}) - tau_k (f(x_k) + theta_k J_k h_k)|| / ||f(x_k)|| with the
  /// theta of the step actually taken; not exported to CSV.
  double retraction_residual = 0.0;
  /// ||J_k h_k||, used for the energy identity check.
  double jh_norm = 0.0;
};

using IterationTrace = std::vector<IterationRecord>;

struct SolveResult {
  Vector x_hat;
  double eta_final = 0.0;
  SolveStatus status = SolveStatus::maxit_reached;
  IterationTrace trace;
  int iterations = 0;
  /// f(x_k) for the accepted iterates x_0 .. x_hat (when keep_residuals).
  std::vector<Vector> residuals;
  SolverConfig config;  ///< resolved settings used by the run
};

/// Factorization of A kept across iterations for the rank-one update path.
struct SubproblemCache {
  linalg::ThinQr qr_a;
};

enum class TerminationDecision { proceed, converged, maxit_reached, stagnated_rounding };

/// Decision after appending the newest record: converged when its gradient
/// norm is below epsilon, stagnated_rounding when eta_guard is on and eta
/// rose by more than eta_slack, maxit_reached when maxit steps are done.
/// `config` must be resolved.
TerminationDecision termination_check(std::span<const IterationRecord> trace,
                                      const SolverConfig& config);

/// Gauss-Newton step h = argmin ||J h + f||. In rank_one_update mode the
/// factors of J = mu (A + u x'), u = -mu^2 (A x - b), come from updating the
/// cached QR of A. Throws rank_deficient when J is numerically singular.
Vector subproblem_solve(const VariationalPoint& point, SubproblemMode mode,
                        const SubproblemCache& cache);

/// Gauss-Newton iteration for TLS starting from the least-squares solution.
/// Throws rank_deficient when A lacks full column rank.
SolveResult solve(const ProblemData& problem, const SolverConfig& config = {});

}  // namespace tlsgn
