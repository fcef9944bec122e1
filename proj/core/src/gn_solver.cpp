#include "tlsgn/gn_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tlsgn/error.hpp"

namespace tlsgn {

const char* to_string(StepMode m) noexcept {
  return m == StepMode::basic ? "basic" : "optimal";
}

const char* to_string(SubproblemMode m) noexcept {
  return m == SubproblemMode::fresh_qr ? "fresh_qr" : "rank_one_update";
}

const char* to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::maxit_reached: return "maxit_reached";
    case SolveStatus::stagnated_rounding: return "stagnated_rounding";
    case SolveStatus::step_degenerate: return "step_degenerate";
  }
  return "unknown";
}

SolverConfig SolverConfig::resolved(double sigma_max) const {
  SolverConfig out = *this;
  // J and f both scale with C, so the gradient J'f scales with sigma_1^2.
  if (!out.epsilon) out.epsilon = epsilon_rel * sigma_max * sigma_max;
  if (!out.eta_slack) out.eta_slack = eta_slack_rel * sigma_max;
  if (!out.eta_guard) out.eta_guard = step_mode == StepMode::optimal;
  if (!(*out.epsilon > 0.0))
    throw Error(ErrorCode::invalid_argument, "epsilon must be positive");
  if (out.maxit < 1) throw Error(ErrorCode::invalid_argument, "maxit must be >= 1");
  if (!(*out.eta_slack >= 0.0))
    throw Error(ErrorCode::invalid_argument, "eta_slack must be nonnegative");
  return out;
}

TerminationDecision termination_check(std::span<const IterationRecord> trace,
                                      const SolverConfig& config) {
  if (trace.empty() || !config.epsilon || !config.eta_guard || !config.eta_slack)
    throw Error(ErrorCode::invalid_argument,
                "termination_check needs a non-empty trace and a resolved config");
  const IterationRecord& last = trace.back();
  if (*config.eta_guard && trace.size() >= 2) {
    const double previous = trace[trace.size() - 2].eta;
    if (last.eta > previous + *config.eta_slack)
      return TerminationDecision::stagnated_rounding;
  }
  if (last.grad_norm < *config.epsilon) return TerminationDecision::converged;
  if (static_cast<int>(trace.size()) - 1 >= config.maxit)
    return TerminationDecision::maxit_reached;
  return TerminationDecision::proceed;
}

Vector subproblem_solve(const VariationalPoint& point, SubproblemMode mode,
                        const SubproblemCache& cache) {
  try {
    if (mode == SubproblemMode::fresh_qr)
      return linalg::ls_solve(linalg::qr_factor(point.jac), -point.f);
    // J = mu (A + u x') with u = -mu^2 (A x - b) = -mu f.
    const Vector u = -point.mu * point.f;
    const linalg::ThinQr updated = linalg::qr_rank_one_update(cache.qr_a, u, point.x);
    return linalg::ls_solve(updated, -point.f) / point.mu;
  } catch (const SingularMatrixError& e) {
    throw Error(ErrorCode::rank_deficient,
                std::string("Jacobian is rank deficient: ") + e.what());
  }
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

IterationRecord make_record(int k, const VariationalPoint& p,
                            const EllipsoidMetric& metric) {
  IterationRecord rec;
  rec.k = k;
  rec.eta = p.eta;
  rec.grad_norm = p.grad_norm;
  rec.ellipsoid_residual = metric.full_column_rank() ? metric.residual(p.f) : kNaN;
  rec.alpha = kNaN;
  rec.step_norm = kNaN;
  rec.orthogonality_residual = kNaN;
  rec.tau = kNaN;
  rec.retraction_residual = kNaN;
  rec.jh_norm = kNaN;
  return rec;
}

// Fills the step columns of `rec` for the move x -> x + alpha h.
void record_step(IterationRecord& rec, const VariationalPoint& from,
                 const VariationalPoint& to, const Vector& h, double alpha) {
  const Vector jh = from.jac * h;
  const double mu2xs = from.mu * from.mu * from.x.dot(alpha * h);
  const double theta = 1.0 / (1.0 + mu2xs);
  const double tau = to.mu / from.mu * (1.0 + mu2xs);
  rec.alpha = alpha;
  rec.step_norm = h.norm();
  rec.tau = tau;
  rec.jh_norm = jh.norm();

  const Vector predicted = tau * (from.f + (theta * alpha) * jh);
  const double scale = std::max(from.f.norm(), std::numeric_limits<double>::min());
  rec.retraction_residual = (to.f - predicted).norm() / scale;

  const double denom = to.f.norm() * rec.jh_norm;
  rec.orthogonality_residual = denom > 0.0 ? std::abs(to.f.dot(jh)) / denom : 0.0;
}

}  // namespace

SolveResult solve(const ProblemData& problem, const SolverConfig& config) {
  SubproblemCache cache;
  cache.qr_a = linalg::qr_factor(problem.a());
  try {
    linalg::check_nonsingular(cache.qr_a.r);
  } catch (const SingularMatrixError& e) {
    throw Error(ErrorCode::rank_deficient,
                std::string("A lacks full column rank: ") + e.what());
  }

  const EllipsoidMetric metric(problem);
  SolveResult result;
  result.config = config.resolved(metric.sigma_max());
  const SolverConfig& cfg = result.config;
  const double slack = *cfg.eta_slack;

  VariationalPoint current = evaluate(problem, linalg::ls_solve(cache.qr_a, problem.b()));
  VariationalPoint previous;
  int k = 0;

  auto finish = [&](SolveStatus status, const VariationalPoint& at, int steps) {
    result.status = status;
    result.x_hat = at.x;
    result.eta_final = at.eta;
    result.iterations = steps;
    return result;
  };

  for (;;) {
    result.trace.push_back(make_record(k, current, metric));
    if (cfg.keep_residuals) result.residuals.push_back(current.f);

    switch (termination_check(result.trace, cfg)) {
      case TerminationDecision::stagnated_rounding:
        // x_k is rejected; report the last accepted iterate.
        if (cfg.keep_residuals) result.residuals.pop_back();
        return finish(SolveStatus::stagnated_rounding, previous, k - 1);
      case TerminationDecision::converged:
        return finish(SolveStatus::converged, current, k);
      case TerminationDecision::maxit_reached:
        return finish(SolveStatus::maxit_reached, current, k);
      case TerminationDecision::proceed:
        break;
    }

    const Vector h = subproblem_solve(current, cfg.subproblem_mode, cache);
    if (h.squaredNorm() == 0.0) return finish(SolveStatus::stagnated_rounding, current, k);

    double alpha = 1.0;
    bool fallback = false;
    VariationalPoint next;
    if (cfg.step_mode == StepMode::optimal) {
      if (const auto a = retraction_step(current, h)) {
        alpha = *a;
        next = evaluate(problem, current.x + alpha * h);
      } else {
        // Step length undefined: unit step, then halving until eta drops.
        fallback = true;
        bool decreased = false;
        for (int halvings = 0; halvings <= 20; ++halvings) {
          next = evaluate(problem, current.x + alpha * h);
          if (next.eta <= current.eta + slack) {
            decreased = true;
            break;
          }
          alpha *= 0.5;
        }
        if (!decreased) {
          result.trace.back().fallback = true;
          return finish(SolveStatus::step_degenerate, current, k);
        }
      }
    } else {
      next = evaluate(problem, current.x + h);
    }

    IterationRecord& rec = result.trace.back();
    record_step(rec, current, next, h, alpha);
    rec.fallback = fallback;

    previous = std::move(current);
    current = std::move(next);
    ++k;
  }
}

}  // namespace tlsgn
