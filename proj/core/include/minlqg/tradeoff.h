#pragma once

#include <string>
#include <vector>

#include "minlqg/fixed_point.h"

namespace minlqg {

struct TradeoffPoint {
  double beta = 0.0;
  double cost_rate = 0.0;
  double info_rate = 0.0;
  int order = 0;
  bool converged = false;
  double lagrangian = 0.0;
};

struct PhaseTransition {
  double beta = 0.0;
  int old_order = 0;
  int new_order = 0;
};

struct SweepResult {
  std::vector<TradeoffPoint> points;  // ascending β
  std::vector<PhaseTransition> transitions;
  std::vector<std::string> warnings;  // monotonicity violations along the path
};

/// Order-0 solution with Λ taken from Σx̂y and N.
SolveReport BetaZeroSolution(const PlantSpec& plant, const CostSpec& cost,
                             const SolverConfig& config = {});

/// D = I, Σx̂u = Σx̂y, M = CᵀKᵀNKC iterated to a fixed point. info_rate is
/// +infinity whenever some mode carries value.
SolveReport BetaInfSolution(const PlantSpec& plant, const CostSpec& cost,
                            const SolverConfig& config = {});

/// 1/λ₁ of the β = 0 solution; +infinity when λ₁ = 0.
double FirstCriticalBeta(const SolveReport& beta_zero);

/// `points` values from lo to hi, geometric when `log_spaced`.
std::vector<double> BetaGrid(double lo, double hi, int points, bool log_spaced);

/// Continuation over an ascending positive grid, warm-starting each point
/// from the previous converged one. Order changes are bisected to
/// `transition_rel_tol` relative width.
SweepResult SweepCurve(const PlantSpec& plant, const CostSpec& cost,
                       const std::vector<double>& beta_grid,
                       const SolverConfig& config = {},
                       double transition_rel_tol = 1e-6);

/// Smallest-information solution along the continuation path with
/// 𝒥 ≤ c. Throws InfeasibleCostError below the β = ∞ cost.
SolveReport SolveForCost(const PlantSpec& plant, const CostSpec& cost, double c,
                         const SolverConfig& config = {});

struct SlopeSample {
  double beta = 0.0;
  double slope = 0.0;     // dℐ/d𝒥 by finite differences
  double expected = 0.0;  // −β
  double rel_error = 0.0;
};

struct SlopeReport {
  std::vector<SlopeSample> samples;
  double max_rel_error = 0.0;
  bool monotone = true;
  bool convex = true;
  double min_second_difference = 0.0;
};

/// Compares finite-difference slopes of the converged (𝒥, ℐ) samples with
/// −β at interior points where the order is positive, and checks
/// monotonicity and discrete convexity (second divided differences ≥ −1e-8).
SlopeReport CheckSlope(const SweepResult& sweep);

}  // namespace minlqg
