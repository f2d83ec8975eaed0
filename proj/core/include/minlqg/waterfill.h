#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "minlqg/psd_linalg.h"

namespace minlqg {

/// Eigenbasis of M1^{1/2} M2 M1^{1/2} built on range(M1) and completed with
/// an orthonormal basis of ker(M1). `values` is descending on the range part
/// followed by zeros for the kernel columns.
struct ModeBasis {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;
  int range_dim = 0;
};

ModeBasis ModeDecomposition(const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2,
                            const TolerancePolicy& tol = {});

/// 1 − 1/λ where λ > 1, else 0.
Eigen::VectorXd ActiveModeCoefficients(const Eigen::VectorXd& lambda);

struct WaterfillResult {
  Eigen::MatrixXd X;
  Eigen::MatrixXd V;
  Eigen::VectorXd lambda;  // threshold-1 scale
  Eigen::VectorXd d;
  int active_count = 0;
  double objective = 0.0;
};

/// Maximizes log|M1 − X|† + tr(M2 X) over 0 ⪯ X ⪯ M1 in closed form.
WaterfillResult SolveWaterfill(const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2,
                               const TolerancePolicy& tol = {});

/// log|M1 − X|† + tr(M2 X); −infinity when M1 − X is not PSD or loses rank
/// against M1.
double SdpObjective(const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2,
                    const Eigen::MatrixXd& X, const TolerancePolicy& tol = {});

struct BruteForceOptions {
  int restarts = 16;
  int steps = 5000;
  std::uint64_t seed = 42;
  double initial_step = 1e-2;
};

struct BruteForceResult {
  Eigen::MatrixXd X;
  double objective = 0.0;
};

/// Projected gradient ascent on the same program, for checking
/// SolveWaterfill(). Intended for dimension ≤ 4.
BruteForceResult BruteForceSdp(const Eigen::MatrixXd& M1, const Eigen::MatrixXd& M2,
                               const BruteForceOptions& options = {},
                               const TolerancePolicy& tol = {});

}  // namespace minlqg
