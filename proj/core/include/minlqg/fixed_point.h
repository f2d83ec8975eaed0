#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <Eigen/Dense>

#include "minlqg/controller_forms.h"
#include "minlqg/plant_model.h"
#include "minlqg/psd_linalg.h"

namespace minlqg {

/// Everything the optimality conditions couple together at one β.
///
/// `modes`, `mode_values` and `active_coeffs` are V, Λ and D. Λ is kept on
/// the scale where a mode is active iff λᵢ > 1/β, i.e. the eigenvalues of
/// Σx̂y^{1/2} N Σx̂y^{1/2} (kernel of Σx̂y appended as zeros).
struct FixedPointState {
  double beta = 0.0;  // +infinity allowed
  Eigen::MatrixXd state_cov;  // Σx
  ObservationStats obs;
  Eigen::MatrixXd S;
  Eigen::MatrixXd M;
  Eigen::MatrixXd L;
  Eigen::MatrixXd N;
  Eigen::MatrixXd modes;
  Eigen::VectorXd mode_values;
  Eigen::VectorXd active_coeffs;
  Eigen::MatrixXd control_estimate_cov;  // Σx̂u
  Eigen::MatrixXd Z;  // Σx̂y|x̂u† − Σx̂y†; empty at β = ∞

  bool empty() const { return state_cov.size() == 0; }
  int order() const { return static_cast<int>((active_coeffs.array() > 0.0).count()); }
};

/// kStationary solves each linear sub-equation to its own fixed point with
/// the other blocks frozen; kSingleSweep applies each map once.
enum class StepMode { kStationary, kSingleSweep };

struct SolverConfig {
  int max_outer_iters = 2000;
  double damping = 1.0;
  double fixed_point_tol = 1e-10;
  TolerancePolicy tol;
  /// Extra randomly perturbed starts; the lowest Lagrangian among converged
  /// runs wins.
  int multi_starts = 0;
  std::uint64_t multi_start_seed = 1;

  void Validate() const;
};

struct SolveReport {
  FixedPointState state;
  ControllerEstimator controller;
  double info_rate = 0.0;
  double cost_rate = 0.0;
  double lagrangian = 0.0;
  std::map<std::string, double> residuals;
  int iterations = 0;
  bool converged = false;
  double damping = 1.0;
  std::string message;

  double max_residual() const;
};

/// Residual level accepted as converged: tol.res, raised to 64ε/(1 − max dᵢ)
/// when modes are nearly saturated (large finite β) and round-off dominates.
double ResidualTolerance(const FixedPointState& state, const TolerancePolicy& tol = {});

/// Σx update followed by fresh observation statistics.
void ForwardStep(const PlantSpec& plant, FixedPointState* state,
                 StepMode mode = StepMode::kStationary,
                 const TolerancePolicy& tol = {});

/// (M, S, L, N) update from the current Σx̂y, Σx̂u and Z.
void BackwardStep(const PlantSpec& plant, const CostSpec& cost,
                  FixedPointState* state, double beta,
                  StepMode mode = StepMode::kStationary,
                  const TolerancePolicy& tol = {});

/// (V, Λ, D, Σx̂u, Z) from Σx̂y and N. β = ∞ gives D = I on the active
/// modes and Σx̂u = Σx̂y.
void WaterfillStep(FixedPointState* state, double beta,
                   const TolerancePolicy& tol = {});

/// L = −(R + BᵀSB)† BᵀSA and N = Lᵀ(R + BᵀSB)L. Throws NumericalError
/// ("indefinite control curvature") if R + BᵀSB is clearly not PSD.
void GainsFromCostToGo(const PlantSpec& plant, const CostSpec& cost,
                       FixedPointState* state, const TolerancePolicy& tol = {});

/// Σx̂y|x̂u† − Σx̂y†.
Eigen::MatrixXd SnrMatrix(const Eigen::MatrixXd& estimate_cov,
                          const Eigen::MatrixXd& control_estimate_cov,
                          const TolerancePolicy& tol = {});

/// The order-0 solution: uncontrolled Σx, dual-Lyapunov S, Σx̂u = 0.
FixedPointState BetaZeroState(const PlantSpec& plant, const CostSpec& cost,
                              const TolerancePolicy& tol = {});

/// Iterates the coupled conditions from `init` (the β = 0 state when empty).
/// β = 0 returns the order-0 solution directly.
SolveReport SolveFixedPoint(const PlantSpec& plant, const CostSpec& cost,
                            double beta, const FixedPointState& init = {},
                            const SolverConfig& config = {});

/// Builds the report fields (controller, rates, residuals, Lagrangian) for a
/// state; `converged` is left false.
SolveReport Summarize(const PlantSpec& plant, const CostSpec& cost,
                      const FixedPointState& state, const TolerancePolicy& tol = {});

/// Relative residual of every equation at `state`.
std::map<std::string, double> Residuals(const PlantSpec& plant, const CostSpec& cost,
                                        const FixedPointState& state,
                                        const TolerancePolicy& tol = {});

/// ½(β⁻¹(log|Σx̂y|† − log|Σx̂y − Σx̂u|†) + tr(MΣx) − tr(NΣx̂u) + tr(SΣξ))
/// with M = Q + AᵀSA − S. Requires 0 < β < ∞.
double LagrangianValue(const PlantSpec& plant, const CostSpec& cost,
                       const FixedPointState& state, double beta,
                       const TolerancePolicy& tol = {});

/// −½ Σ log(1 − Dᵢ) in nats; +infinity when some Dᵢ = 1.
double InfoRate(const FixedPointState& state);

/// ½(log|Σx̂y|† − log|Σx̂y − Σx̂u|†); +infinity on rank loss.
double InfoRatePdet(const FixedPointState& state, const TolerancePolicy& tol = {});

/// ½(tr(QΣx) + tr(R L Σx̂u Lᵀ)).
double CostRate(const CostSpec& cost, const FixedPointState& state);

/// K from the observation statistics, W = Σx̂u Σx̂y†,
/// Σω = Σx̂y^{1/2} V D(I − D) Vᵀ Σx̂y^{1/2}, and L.
ControllerEstimator EstimatorForm(const FixedPointState& state,
                                  const TolerancePolicy& tol = {});

}  // namespace minlqg
