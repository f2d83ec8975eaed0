#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace minlqg::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // non-convergence or a failed check
  kBadArguments = 2,
  kInfeasible = 3,
};

struct SolveOptions {
  std::string problem;
  std::optional<double> beta;
  std::optional<double> cost;
  bool channel = false;
  bool bits = false;
  std::string output;  // empty: stdout
};

struct SweepOptions {
  std::string problem;
  double beta_min = 0.0;
  double beta_max = 0.0;
  int points = 0;
  bool log_grid = false;
  bool bits = false;
};

struct SimulateOptions {
  std::string problem;
  std::optional<std::int64_t> steps;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> burn_in;
  std::string controller;  // artifact path, "zero", or empty to solve inline
  std::optional<double> beta;
  bool bits = false;
};

// Each command writes its result to `out` and diagnostics to `err`, and
// returns the process exit code.
int RunSolve(const SolveOptions& opt, std::ostream& out, std::ostream& err);
int RunSweep(const SweepOptions& opt, std::ostream& out, std::ostream& err);
int RunSimulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace minlqg::cli
