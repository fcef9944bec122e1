#include "tlsgn/power_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tlsgn/error.hpp"

namespace tlsgn {

PowerOracle::PowerOracle(const ProblemData& problem) : problem_(problem) {
  if (problem.m() < problem.n() + 1) return;
  qr_c_ = linalg::qr_factor(problem.c());
  try {
    linalg::check_nonsingular(qr_c_.r);
    full_rank_ = true;
  } catch (const SingularMatrixError&) {
    full_rank_ = false;
  }
}

void PowerOracle::require_full_rank() const {
  if (!full_rank_)
    throw Error(ErrorCode::rank_deficient,
                "power iteration needs C with full column rank");
}

PowerState PowerOracle::start(const Vector& s) const {
  if (s.size() != problem_.n() + 1)
    throw Error(ErrorCode::dimension_mismatch, "s must have n + 1 entries");
  PowerState out;
  out.s = s / s.norm();
  out.f = problem_.c() * out.s;
  return out;
}

PowerState PowerOracle::start_from_residual(const Vector& f0) const {
  if (f0.size() != problem_.m())
    throw Error(ErrorCode::dimension_mismatch, "f0 must have m entries");
  require_full_rank();
  return start(linalg::ls_solve(qr_c_, f0));
}

PowerState PowerOracle::power_step(const PowerState& state) const {
  require_full_rank();
  // (C'C)^{-1} s = R^{-1} R^{-T} s
  const Vector y = linalg::solve_upper(qr_c_.r, linalg::solve_upper_transpose(qr_c_.r, state.s));
  PowerState out;
  out.beta = 1.0 / y.norm();
  out.s = out.beta * y;
  out.f = problem_.c() * out.s;
  out.k = state.k + 1;
  return out;
}

EllipsoidStep PowerOracle::ellipsoid_step_explicit(const PowerState& state) const {
  require_full_rank();
  const Matrix& c = problem_.c();
  const Vector f = c * state.s;
  // Unconstrained minimizer of ||f + C w|| is w = -s; the constraint keeps
  // the step on the tangent space at f.
  const linalg::ConstrainedLsResult cls = linalg::constrained_ls_solve(qr_c_, -f, state.s);

  EllipsoidStep out;
  out.w = cls.x_bar;
  out.z = f + c * out.w;
  // Radial retraction: the multiple of z whose C^+ preimage has unit norm.
  const Vector y = linalg::ls_solve(qr_c_, out.z);
  const double ny = y.norm();
  out.state.s = y / ny;
  out.state.f = c * out.state.s;
  // z = C (C'C)^{-1} s / s'(C'C)^{-1}s and the multiplier equals
  // -1 / s'(C'C)^{-1}s, so ||(C'C)^{-1} s|| = ny / (-lambda).
  out.state.beta = -cls.lambda / ny;
  out.state.k = state.k + 1;
  return out;
}

std::vector<PowerState> PowerOracle::run(const PowerState& initial, int steps) const {
  std::vector<PowerState> states;
  states.reserve(static_cast<std::size_t>(steps) + 1);
  states.push_back(initial);
  for (int i = 0; i < steps; ++i) states.push_back(power_step(states.back()));
  return states;
}

double PowerOracle::check_equivalence(std::span<const Vector> gn_residuals) const {
  if (gn_residuals.empty())
    throw Error(ErrorCode::trace_incompatible, "empty Gauss-Newton residual history");
  if (!full_rank_) {
    const double scale = problem_.c().norm();
    if (!(gn_residuals.front().norm() <= 1e-12 * scale)) require_full_rank();
    double worst = 0.0;
    for (const Vector& f : gn_residuals)
      worst = std::max(worst, (f - gn_residuals.front()).norm());
    return worst;
  }
  const std::vector<PowerState> states =
      run(start_from_residual(gn_residuals.front()),
          static_cast<int>(gn_residuals.size()) - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < gn_residuals.size(); ++k)
    worst = std::max(worst, (gn_residuals[k] - states[k].f).norm());
  return worst;
}

double PowerOracle::check_equivalence(const SolveResult& gn) const {
  if (gn.config.step_mode != StepMode::optimal)
    throw Error(ErrorCode::trace_incompatible, "trace is not from optimal step mode");
  for (const IterationRecord& rec : gn.trace)
    if (rec.fallback)
      throw Error(ErrorCode::trace_incompatible,
                  "trace contains a fallback step at k = " + std::to_string(rec.k));
  return check_equivalence(std::span<const Vector>(gn.residuals));
}

namespace {

struct Fit {
  double rate = 0.0;
  int points = 0;
};

// Least-squares slope of log(d_k) against k over the last samples of the
// decreasing run that starts below `high`. The run ends at the first sample
// that fails to decrease (or is exactly zero); everything from there on is
// taken as the rounding floor, and run samples closer than the margin to the
// floor's largest value are dropped since rounding already distorts them.
Fit fit_geometric_rate(const std::vector<double>& dev, double high) {
  std::size_t begin = 0;
  while (begin < dev.size() && !(dev[begin] <= high)) ++begin;
  std::size_t end = begin;
  while (end < dev.size() && dev[end] > 0.0 && (end == begin || dev[end] < dev[end - 1])) ++end;

  double floor_level = 0.0;
  for (std::size_t k = end; k < dev.size(); ++k) floor_level = std::max(floor_level, dev[k]);
  std::size_t last = end;
  while (last > begin && dev[last - 1] < rate_floor_margin * floor_level) --last;
  const std::size_t first =
      last - std::min<std::size_t>(last - begin, static_cast<std::size_t>(rate_fit_points));

  std::vector<double> ks;
  std::vector<double> logs;
  for (std::size_t k = first; k < last; ++k) {
    ks.push_back(static_cast<double>(k));
    logs.push_back(std::log(dev[k]));
  }
  Fit fit;
  fit.points = static_cast<int>(ks.size());
  if (fit.points < rate_min_points) return fit;
  double mk = 0.0, ml = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ml += logs[i];
  }
  mk /= static_cast<double>(ks.size());
  ml /= static_cast<double>(ks.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - mk) * (logs[i] - ml);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  fit.rate = std::exp(sxy / sxx);
  return fit;
}

}  // namespace

RateReport measure_rates(std::span<const Vector> residuals, const SvdBundle& bundle) {
  const double sigma1 = bundle.sigma_max();
  const double sq = bundle.sigma_np1;
  const double sq1 = bundle.sigma_n;
  if (!(sq1 - sq > tol_gap * sigma1) || !(sq > 0.0))
    throw Error(ErrorCode::insufficient_data,
                "no simple dominant eigenvalue: sigma_q-1 = " + std::to_string(sq1) +
                    ", sigma_q = " + std::to_string(sq));
  if (residuals.empty()) throw Error(ErrorCode::insufficient_data, "empty sequence");

  Vector uq = bundle.u_last;
  if (uq.dot(residuals.front()) < 0.0) uq = -uq;
  const Vector target = sq * uq;

  std::vector<double> dev_f;
  std::vector<double> dev_eta;
  for (const Vector& f : residuals) {
    dev_f.push_back((f - target).norm() / sigma1);
    dev_eta.push_back(std::abs(f.norm() - sq) / sigma1);
  }

  RateReport report;
  const double ratio = sq / sq1;
  report.rho = ratio * ratio;
  const Fit ff = fit_geometric_rate(dev_f, rate_window_high);
  const Fit fe = fit_geometric_rate(dev_eta, rate_window_high);
  report.points_f = ff.points;
  report.points_eta = fe.points;
  if (ff.points < rate_min_points || fe.points < rate_min_points)
    throw Error(ErrorCode::insufficient_data,
                "too few pre-floor samples for a rate fit (f: " + std::to_string(ff.points) +
                    ", eta: " + std::to_string(fe.points) + ")");
  report.fitted_rate_f = ff.rate;
  report.fitted_rate_eta = fe.rate;
  return report;
}

RateReport measure_rates(std::span<const PowerState> states, const SvdBundle& bundle) {
  std::vector<Vector> residuals;
  residuals.reserve(states.size());
  for (const PowerState& s : states) residuals.push_back(s.f);
  return measure_rates(std::span<const Vector>(residuals), bundle);
}

}  // namespace tlsgn
