#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "tlsgn/tlsgn.hpp"

namespace tlsgn::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::map<std::string, Method> kMethods{{"gn-basic", Method::gn_basic},
                                             {"gn-optimal", Method::gn_optimal},
                                             {"svd", Method::svd},
                                             {"power", Method::power}};

std::string method_name(Method m) {
  for (const auto& [name, value] : kMethods)
    if (value == m) return name;
  return "unknown";
}

int exit_code_for(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return exit_converged;
    case SolveStatus::maxit_reached: return exit_maxit;
    case SolveStatus::stagnated_rounding:
    case SolveStatus::step_degenerate: return exit_stagnated;
  }
  return exit_usage;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::io_error:
    case ErrorCode::parse_error: return exit_io;
    case ErrorCode::not_well_posed:
    case ErrorCode::rank_deficient:
    case ErrorCode::hemisphere_violation: return exit_not_well_posed;
    default: return exit_usage;
  }
}

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("tlsgn", sink);
  logger->set_pattern("[%l] %v");
  logger->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TLSGN_LOG")) {
    const std::string level(env);
    if (level == "quiet") logger->set_level(spdlog::level::off);
    else if (level == "info") logger->set_level(spdlog::level::info);
    else if (level == "trace") logger->set_level(spdlog::level::trace);
  }
  return logger;
}

SolverConfig solver_config(const RunSpec& spec) {
  SolverConfig cfg;
  cfg.epsilon = spec.epsilon;
  cfg.maxit = spec.maxit;
  cfg.eta_guard = spec.eta_guard;
  cfg.subproblem_mode = spec.subproblem_mode;
  cfg.step_mode = spec.method == Method::gn_basic ? StepMode::basic : StepMode::optimal;
  return cfg;
}

// Inverse power iteration from s_0 = C^+ f(x_LS); each f_k is lifted back to
// x_k and judged with the same termination rules as the Gauss-Newton solver.
RunOutcome run_power(const ProblemData& problem, const RunSpec& spec,
                     const EllipsoidMetric& metric) {
  const SolverConfig cfg = solver_config(spec).resolved(metric.sigma_max());
  const linalg::ThinQr qr_a = linalg::qr_factor(problem.a());
  try {
    linalg::check_nonsingular(qr_a.r);
  } catch (const SingularMatrixError& e) {
    throw Error(ErrorCode::rank_deficient, std::string("A lacks full column rank: ") + e.what());
  }
  const Vector x0 = linalg::ls_solve(qr_a, problem.b());
  const VariationalPoint p0 = evaluate(problem, x0);

  RunOutcome out;
  auto record_for = [&](int k, const VariationalPoint& p, const Vector& f) {
    IterationRecord rec;
    rec.k = k;
    rec.eta = p.eta;
    rec.grad_norm = p.grad_norm;
    rec.ellipsoid_residual = metric.full_column_rank() ? metric.residual(f) : kNaN;
    rec.alpha = rec.step_norm = rec.orthogonality_residual = rec.tau = kNaN;
    rec.retraction_residual = rec.jh_norm = kNaN;
    return rec;
  };

  const PowerOracle oracle(problem);
  if (!oracle.full_column_rank()) {
    // Consistent data: the power sequence is the constant f(x_0) = 0.
    out.trace.push_back(record_for(0, p0, p0.f));
    out.x = x0;
    out.eta = p0.eta;
    out.status = to_string(SolveStatus::converged);
    return out;
  }

  PowerState state = oracle.start_from_residual(p0.f);
  VariationalPoint current = p0;
  VariationalPoint previous;
  for (int k = 0;; ++k) {
    if (k > 0) current = evaluate(problem, lift_to_x(metric, state.f));
    out.trace.push_back(record_for(k, current, state.f));
    const TerminationDecision d = termination_check(out.trace, cfg);
    if (d != TerminationDecision::proceed) {
      SolveStatus status = SolveStatus::converged;
      const VariationalPoint* at = &current;
      int steps = k;
      if (d == TerminationDecision::maxit_reached) status = SolveStatus::maxit_reached;
      if (d == TerminationDecision::stagnated_rounding) {
        status = SolveStatus::stagnated_rounding;
        at = &previous;
        steps = k - 1;
      }
      out.x = at->x;
      out.eta = at->eta;
      out.iterations = steps;
      out.status = to_string(status);
      out.exit_code = exit_code_for(status);
      return out;
    }
    previous = current;
    state = oracle.power_step(state);
  }
}

}  // namespace

RunOutcome execute(const ProblemData& problem, const RunSpec& spec) {
  if (spec.method == Method::svd) {
    const TlsSolution sol = solve_tls_svd(problem);
    RunOutcome out;
    out.x = sol.x;
    out.eta = sol.eta;
    out.status = to_string(SolveStatus::converged);
    return out;
  }
  const Analysis an = analyze(problem);
  if (an.well_posedness.verdict != Verdict::unique)
    throw NotWellPosedError(an.well_posedness);

  if (spec.method == Method::power) return run_power(problem, spec, EllipsoidMetric(problem));

  SolveResult res = solve(problem, solver_config(spec));
  RunOutcome out;
  out.x = std::move(res.x_hat);
  out.eta = res.eta_final;
  out.status = to_string(res.status);
  out.iterations = res.iterations;
  out.trace = std::move(res.trace);
  out.exit_code = exit_code_for(res.status);
  return out;
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
  out << "k,eta,grad_norm,alpha,step_norm,ellipsoid_residual,orthogonality_residual,tau,fallback\n";
  for (const IterationRecord& r : trace) {
    out << r.k << ',' << io::format_double(r.eta) << ',' << io::format_double(r.grad_norm) << ','
        << io::format_double(r.alpha) << ',' << io::format_double(r.step_norm) << ','
        << io::format_double(r.ellipsoid_residual) << ','
        << io::format_double(r.orthogonality_residual) << ',' << io::format_double(r.tau) << ','
        << (r.fallback ? 1 : 0) << '\n';
  }
}

void write_outcome(std::ostream& out, const RunOutcome& o, const RunSpec& spec) {
  if (spec.format == OutputFormat::json) {
    nlohmann::json j;
    j["method"] = method_name(spec.method);
    j["status"] = o.status;
    j["iterations"] = o.iterations;
    j["eta"] = o.eta;
    j["x"] = std::vector<double>(o.x.data(), o.x.data() + o.x.size());
    out << j.dump() << '\n';
    return;
  }
  out << "method " << method_name(spec.method) << '\n'
      << "status " << o.status << '\n'
      << "iterations " << o.iterations << '\n'
      << "eta " << io::format_double(o.eta) << '\n'
      << "x";
  for (Index i = 0; i < o.x.size(); ++i) out << ' ' << io::format_double(o.x(i));
  out << '\n';
}

namespace {

ProblemData load_problem(const RunSpec& spec, std::optional<std::uint64_t> seed) {
  if (!spec.gen.empty()) {
    probgen::SpectrumSpec s = probgen::parse_spec(spec.gen);
    if (seed) s.seed = *seed;
    return probgen::generate(s);
  }
  return ProblemData(io::read_matrix(spec.a_path), io::read_vector(spec.b_path));
}

void log_problem(spdlog::logger& log, const ProblemData& problem) {
  if (!log.should_log(spdlog::level::info)) return;
  const Analysis an = analyze(problem);
  log.info("problem m={} n={} sigma_1={:.6e} sigma_n={:.6e} sigma_n+1={:.6e} verdict={}",
           problem.m(), problem.n(), an.bundle.sigma_max(), an.bundle.sigma_n,
           an.bundle.sigma_np1, to_string(an.well_posedness.verdict));
}

void log_equivalence(spdlog::logger& log, const ProblemData& problem, const RunSpec& spec) {
  if (!log.should_log(spdlog::level::info) || spec.method != Method::gn_optimal) return;
  SolverConfig cfg = solver_config(spec);
  const SolveResult res = solve(problem, cfg);
  try {
    const double dev = PowerOracle(problem).check_equivalence(res);
    log.info("power-method deviation max_k ||f_k - f_k^power|| = {:.3e}", dev);
  } catch (const Error& e) {
    log.info("power-method comparison skipped: {}", e.what());
  }
}

void log_trace(spdlog::logger& log, const IterationTrace& trace) {
  for (const IterationRecord& r : trace)
    log.trace("k={} eta={:.17g} grad={:.3e} alpha={:.6g} ellipsoid={:.2e} orth={:.2e}", r.k,
              r.eta, r.grad_norm, r.alpha, r.ellipsoid_residual, r.orthogonality_residual);
}

void write_trace_file(const std::string& path, const IterationTrace& trace) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::io_error, "cannot write trace '" + path + "'");
  write_trace_csv(f, trace);
}

int run_single(const RunSpec& spec, std::ostream& out, spdlog::logger& log) {
  const ProblemData problem = load_problem(spec, std::nullopt);
  log_problem(log, problem);
  const RunOutcome o = execute(problem, spec);
  log_trace(log, o.trace);
  log_equivalence(log, problem, spec);
  if (!spec.trace_path.empty()) write_trace_file(spec.trace_path, o.trace);
  write_outcome(out, o, spec);
  return o.exit_code;
}

int run_batch(const RunSpec& spec, std::ostream& out, spdlog::logger& log) {
  std::vector<std::uint64_t> seeds = spec.seeds;
  if (seeds.empty()) {
    const std::uint64_t base = probgen::parse_spec(spec.gen).seed;
    for (int i = 0; i < spec.repeat; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  }
  const std::filesystem::path dir(spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create '" + spec.out_dir + "': " + ec.message());

  struct BatchItem {
    RunOutcome outcome;
    std::string error;
    int exit_code = 0;
  };
  std::vector<std::future<BatchItem>> jobs;
  for (const std::uint64_t seed : seeds) {
    jobs.push_back(std::async(std::launch::async, [&spec, &dir, seed] {
      BatchItem item;
      try {
        const ProblemData problem = load_problem(spec, seed);
        item.outcome = execute(problem, spec);
        item.exit_code = item.outcome.exit_code;
        const std::string stem = "run_" + std::to_string(seed);
        std::ofstream res(dir / (stem + (spec.format == OutputFormat::json ? ".json" : ".txt")));
        write_outcome(res, item.outcome, spec);
        write_trace_file((dir / (stem + "_trace.csv")).string(), item.outcome.trace);
        if (!res) throw Error(ErrorCode::io_error, "cannot write results for " + stem);
      } catch (const Error& e) {
        item.error = e.what();
        item.exit_code = exit_code_for(e.code());
      }
      return item;
    }));
  }

  int worst = exit_converged;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const BatchItem item = jobs[i].get();
    if (!item.error.empty()) {
      log.error("seed {}: {}", seeds[i], item.error);
      out << "seed " << seeds[i] << " error " << item.exit_code << '\n';
    } else {
      out << "seed " << seeds[i] << " status " << item.outcome.status << " iterations "
          << item.outcome.iterations << " eta " << io::format_double(item.outcome.eta) << '\n';
    }
    if (worst == exit_converged) worst = item.exit_code;
  }
  return worst;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Total least squares by Gauss-Newton iteration"};
  RunSpec spec;
  std::string method = "gn-optimal";
  std::string subproblem = "rank-one-update";
  std::string format = "text";
  std::string guard;

  auto* a_opt = app.add_option("--a", spec.a_path, "Data matrix A (.mtx or .csv)");
  auto* b_opt = app.add_option("--b", spec.b_path, "Right-hand side b (.mtx, .csv or flat list)");
  auto* gen_opt = app.add_option("--gen", spec.gen, "Generated problem: m=..,n=..,gap=..,seed=..,shape=geometric|separated");
  a_opt->needs(b_opt);
  b_opt->needs(a_opt);
  gen_opt->excludes(a_opt)->excludes(b_opt);
  app.add_option("--method", method, "gn-basic | gn-optimal | svd | power")
      ->check(CLI::IsMember({"gn-basic", "gn-optimal", "svd", "power"}));
  app.add_option("--subproblem", subproblem, "rank-one-update | fresh-qr")
      ->check(CLI::IsMember({"rank-one-update", "fresh-qr"}));
  app.add_option("--epsilon", spec.epsilon, "Gradient tolerance (default 1e-10 * sigma_1^2)")
      ->check(CLI::PositiveNumber);
  app.add_option("--maxit", spec.maxit, "Iteration cap")->check(CLI::Range(1, 1000000));
  app.add_option("--eta-guard", guard, "on | off (default: on for optimal steps)")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--trace", spec.trace_path, "Write the per-iteration trace as CSV");
  app.add_option("--format", format, "text | json")->check(CLI::IsMember({"text", "json"}));
  auto* repeat_opt = app.add_option("--repeat", spec.repeat, "Batch: N consecutive seeds")
                         ->check(CLI::PositiveNumber);
  auto* seeds_opt = app.add_option("--seeds", spec.seeds, "Batch: explicit seed list")
                        ->delimiter(',');
  auto* dir_opt = app.add_option("--out-dir", spec.out_dir, "Batch: output directory");
  repeat_opt->excludes(seeds_opt)->needs(gen_opt)->needs(dir_opt);
  seeds_opt->needs(gen_opt)->needs(dir_opt);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (spec.gen.empty() && spec.a_path.empty())
      throw CLI::RequiredError("one of --gen or --a/--b");
    if (!spec.out_dir.empty() && spec.repeat == 0 && spec.seeds.empty())
      throw CLI::RequiredError("--repeat or --seeds with --out-dir");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_converged;
  } catch (const CLI::ParseError& e) {
    err << "tlsgn: " << e.what() << '\n';
    return exit_io;
  }

  spec.method = kMethods.at(method);
  spec.subproblem_mode =
      subproblem == "fresh-qr" ? SubproblemMode::fresh_qr : SubproblemMode::rank_one_update;
  spec.format = format == "json" ? OutputFormat::json : OutputFormat::text;
  if (!guard.empty()) spec.eta_guard = guard == "on";

  auto log = make_logger(err);
  try {
    const bool batch = spec.repeat > 0 || !spec.seeds.empty();
    const int code = batch ? run_batch(spec, out, *log) : run_single(spec, out, *log);
    log->flush();
    return code;
  } catch (const Error& e) {
    log->flush();
    err << "tlsgn: " << to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "tlsgn: " << e.what() << '\n';
    return exit_usage;
  }
}

}  // namespace tlsgn::cli
