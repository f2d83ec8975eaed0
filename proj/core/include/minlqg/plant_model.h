#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minlqg/psd_linalg.h"

namespace minlqg {

/// Discrete-time LTI plant
///
///   x[t+1] = A x[t] + B u[t] + ξ[t],   ξ ~ N(0, process_noise)
///   y[t]   = C x[t] + ε[t],            ε ~ N(0, observation_noise)
///
/// with n states, k observations and l controls.
struct PlantSpec {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd C;
  Eigen::MatrixXd process_noise;
  Eigen::MatrixXd observation_noise;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int obs_dim() const { return static_cast<int>(C.rows()); }
  int control_dim() const { return static_cast<int>(B.cols()); }
};

/// Per-step cost ½(xᵀQx + uᵀRu).
struct CostSpec {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
};

/// Second-order statistics of the observation given a state covariance.
struct ObservationStats {
  Eigen::MatrixXd obs_cov;       // Σy = C Σx Cᵀ + Σε
  Eigen::MatrixXd gain;          // K = Σx Cᵀ Σy†, so that x = K y + κ
  Eigen::MatrixXd estimate_cov;  // Σx̂y = K Σy Kᵀ
  Eigen::MatrixXd residual_cov;  // Σκ = Σx − Σx̂y
};

struct ValidationReport {
  std::vector<std::string> errors;
  double spectral_radius = 0.0;

  bool ok() const { return errors.empty(); }
};

/// Collects every dimension, symmetry, PSD and stability problem.
ValidationReport Validate(const PlantSpec& plant, const CostSpec& cost,
                          const TolerancePolicy& tol = {});

/// Throws the first problem found by Validate() as DimensionError,
/// NotPsdError or UnstablePlantError.
void ValidateOrThrow(const PlantSpec& plant, const CostSpec& cost,
                     const TolerancePolicy& tol = {});

double SpectralRadius(const Eigen::MatrixXd& A);

/// Solves the Stein equation X = F X Fᵀ + G by Smith doubling. Requires
/// ρ(F) < 1; G may be indefinite. Throws NumericalError if the doubling does
/// not settle within 100·n steps or the residual exceeds tol.res.
Eigen::MatrixXd SolveStein(const Eigen::MatrixXd& F, const Eigen::MatrixXd& G,
                           const TolerancePolicy& tol = {});

/// Σx = A Σx Aᵀ + Σξ.
Eigen::MatrixXd UncontrolledLyapunov(const PlantSpec& plant,
                                     const TolerancePolicy& tol = {});

/// S = Q + Aᵀ S A.
Eigen::MatrixXd DualLyapunov(const PlantSpec& plant, const CostSpec& cost,
                             const TolerancePolicy& tol = {});

/// One application of the closed-loop covariance map
///   Σx ↦ (A+BL) Σx̂u (A+BL)ᵀ + A (Σx − Σx̂u) Aᵀ + Σξ.
/// Throws NumericalError("inconsistent estimator covariance") when
/// Σx − Σx̂u is not numerically PSD.
Eigen::MatrixXd ClosedLoopStateCov(const PlantSpec& plant,
                                   const Eigen::MatrixXd& feedback_gain,
                                   const Eigen::MatrixXd& control_estimate_cov,
                                   const Eigen::MatrixXd& state_cov,
                                   const TolerancePolicy& tol = {});

ObservationStats ObservationStatistics(const PlantSpec& plant,
                                       const Eigen::MatrixXd& state_cov,
                                       const TolerancePolicy& tol = {});

/// ½(tr(Q Σx) + tr(R Σu)).
double ExpectedCostRate(const CostSpec& cost, const Eigen::MatrixXd& state_cov,
                        const Eigen::MatrixXd& control_cov);

}  // namespace minlqg
