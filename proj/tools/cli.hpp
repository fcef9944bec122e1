#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tlsgn/gn_solver.hpp"

namespace tlsgn::cli {

enum class Method { gn_basic, gn_optimal, svd, power };
enum class OutputFormat { text, json };

enum ExitCode : int {
  exit_converged = 0,
  exit_usage = 1,
  exit_not_well_posed = 2,
  exit_maxit = 3,
  exit_io = 4,
  exit_stagnated = 5,
};

struct RunSpec {
  std::string a_path;
  std::string b_path;
  std::string gen;  ///< probgen spec string, e.g. "m=100,n=10,gap=4,seed=1"
  Method method = Method::gn_optimal;
  SubproblemMode subproblem_mode = SubproblemMode::rank_one_update;
  std::optional<double> epsilon;
  int maxit = 200;
  std::optional<bool> eta_guard;
  std::string trace_path;
  OutputFormat format = OutputFormat::text;
  /// Batch mode over generated problems: seeds from --seeds, or --repeat
  /// consecutive seeds starting at the --gen seed.
  int repeat = 0;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
};

/// Result of one method run on one problem.
struct RunOutcome {
  Vector x;
  double eta = 0.0;
  std::string status;
  int iterations = 0;
  IterationTrace trace;
  int exit_code = exit_converged;
};

RunOutcome execute(const ProblemData& problem, const RunSpec& spec);

void write_trace_csv(std::ostream& out, const IterationTrace& trace);
void write_outcome(std::ostream& out, const RunOutcome& outcome, const RunSpec& spec);

/// Full command line: parse, run, print. Returns the process exit code.
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tlsgn::cli
