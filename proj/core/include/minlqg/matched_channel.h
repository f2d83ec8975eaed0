#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minlqg/fixed_point.h"

namespace minlqg {

/// Additive Gaussian channel over the m active modes:
///   w = E x̂y,  ŵ = w + v (v ~ N(0, noise_cov)),  x̂u = G ŵ.
struct MatchedChannel {
  Eigen::MatrixXd encoder;    // E, m×n
  Eigen::MatrixXd noise_cov;  // I − D on the active block, m×m
  Eigen::MatrixXd decoder;    // G, n×m
  Eigen::VectorXd active_coeffs;

  int active_dim() const { return static_cast<int>(active_coeffs.size()); }
};

/// E = D^{1/2} Vᵀ Σx̂y^{†/2} and G = Σx̂y^{1/2} V D^{1/2}, keeping only the
/// columns of V with Dᵢ > 0.
MatchedChannel BuildMatchedChannel(const Eigen::MatrixXd& estimate_cov,
                                   const Eigen::MatrixXd& modes,
                                   const Eigen::VectorXd& active_coeffs,
                                   const TolerancePolicy& tol = {});

MatchedChannel BuildMatchedChannel(const FixedPointState& state,
                                   const TolerancePolicy& tol = {});

/// ½ log det(Σw + Σv) − ½ log det(Σv) for the channel's input covariance.
double ChannelCapacity(const MatchedChannel& channel, const Eigen::MatrixXd& estimate_cov);

struct ChannelReport {
  double input_cov = 0.0;          // ‖E Σx̂y Eᵀ − D‖ relative
  double output_cov = 0.0;         // ‖Σw + Σv − I‖ relative
  double estimator_map = 0.0;      // G E vs W
  double estimator_noise = 0.0;    // G Σv Gᵀ vs Σω
  double decoder_cov = 0.0;        // G Σŵ Gᵀ vs Σx̂u
  double kl_quadratic = 0.0;       // Σŵ⁻¹ vs I
  double capacity = 0.0;
  double info_rate = 0.0;
  double capacity_gap = 0.0;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
};

/// Checks the matching identities against `state`. Matrix identities use
/// tol.res; the capacity must agree with the information rate within
/// `capacity_tol` (absolute, nats).
ChannelReport CheckChannelProperties(const MatchedChannel& channel,
                                     const FixedPointState& state,
                                     const TolerancePolicy& tol = {},
                                     double capacity_tol = 1e-10);

}  // namespace minlqg
