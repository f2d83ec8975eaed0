#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "commands.h"

namespace {

// CLI11 does not accept "inf" for doubles.
bool ParseBeta(const std::string& text, double* out) {
  if (text == "inf" || text == "Inf" || text == "infinity") {
    *out = std::numeric_limits<double>::infinity();
    return true;
  }
  try {
    size_t used = 0;
    *out = std::stod(text, &used);
    return used == text.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace minlqg::cli;
  CLI::App app{"Information-rate vs. cost trade-off for memoryless LQG controllers"};
  app.require_subcommand(1);

  SolveOptions solve;
  std::string solve_beta;
  double solve_cost = 0.0;
  auto* cmd_solve = app.add_subcommand("solve", "Solve at one beta or for a cost guarantee");
  auto* beta_opt = cmd_solve->add_option("--beta", solve_beta, "Lagrange multiplier (>= 0, or inf)");
  auto* cost_opt = cmd_solve->add_option("--cost", solve_cost, "Cost-rate guarantee c");
  beta_opt->excludes(cost_opt);
  cmd_solve->add_flag("--channel", solve.channel, "Emit the matched channel realization");
  cmd_solve->add_flag("--bits", solve.bits, "Report rates in bits");
  cmd_solve->add_option("-o,--output", solve.output, "Write the artifact to a file");
  cmd_solve->add_option("problem", solve.problem, "Problem JSON")->required();

  SweepOptions sweep;
  auto* cmd_sweep = app.add_subcommand("sweep", "Trade-off curve over a beta grid (CSV)");
  cmd_sweep->add_option("--beta-min", sweep.beta_min, "Smallest beta (> 0 with --log-grid)")->required();
  cmd_sweep->add_option("--beta-max", sweep.beta_max, "Largest beta")->required();
  cmd_sweep->add_option("--points", sweep.points, "Grid size (>= 2)")->required();
  cmd_sweep->add_flag("--log-grid", sweep.log_grid, "Geometric grid");
  cmd_sweep->add_flag("--bits", sweep.bits, "Report rates in bits");
  cmd_sweep->add_option("problem", sweep.problem, "Problem JSON")->required();

  SimulateOptions sim;
  std::int64_t steps = 0, burn_in = 0;
  std::uint64_t seed = 0;
  double sim_beta = 0.0;
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo check against the analytic law");
  auto* steps_opt = cmd_sim->add_option("--steps", steps, "Total steps including burn-in");
  auto* seed_opt = cmd_sim->add_option("--seed", seed, "RNG seed (default 0)");
  auto* burn_opt = cmd_sim->add_option("--burn-in", burn_in, "Discarded initial steps");
  cmd_sim->add_option("--controller", sim.controller, "Solve artifact, or 'zero'");
  auto* sim_beta_opt = cmd_sim->add_option("--beta", sim_beta, "Solve inline at this beta");
  cmd_sim->add_flag("--bits", sim.bits, "Report rates in bits");
  cmd_sim->add_option("problem", sim.problem, "Problem JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadArguments;
  }

  if (cmd_solve->parsed()) {
    if (!beta_opt->empty()) {
      double b = 0.0;
      if (!ParseBeta(solve_beta, &b)) {
        std::cerr << "error: --beta: not a number: " << solve_beta << "\n";
        return kBadArguments;
      }
      solve.beta = b;
    }
    if (!cost_opt->empty()) solve.cost = solve_cost;
    return RunSolve(solve, std::cout, std::cerr);
  }
  if (cmd_sweep->parsed()) return RunSweep(sweep, std::cout, std::cerr);
  if (!steps_opt->empty()) sim.steps = steps;
  if (!seed_opt->empty()) sim.seed = seed;
  if (!burn_opt->empty()) sim.burn_in = burn_in;
  if (!sim_beta_opt->empty()) sim.beta = sim_beta;
  return RunSimulate(sim, std::cout, std::cerr);
}
