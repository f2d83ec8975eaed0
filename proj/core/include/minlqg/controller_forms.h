#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "minlqg/plant_model.h"
#include "minlqg/psd_linalg.h"

namespace minlqg {

/// Memoryless controller acting directly on the observation:
///   u = H y + η,  η ~ N(0, Ση).
struct ControllerRaw {
  Eigen::MatrixXd feedback;   // H, l×k
  Eigen::MatrixXd noise_cov;  // Ση, l×l
};

/// The same controller factored through estimators:
///   x̂y = K y,   x̂u = W x̂y + ω (ω ~ N(0, Σω)),   u = L x̂u.
struct ControllerEstimator {
  Eigen::MatrixXd obs_gain;             // K, n×k
  Eigen::MatrixXd estimator_map;        // W, n×n
  Eigen::MatrixXd estimator_noise_cov;  // Σω, n×n
  Eigen::MatrixXd feedback_gain;        // L, l×n
};

/// H = L W K, Ση = L Σω Lᵀ.
ControllerRaw EstimatorToRaw(const ControllerEstimator& est);

/// Zero-mean Gaussian over a list of labelled, stacked variables.
class JointGaussian {
 public:
  struct Variable {
    std::string label;
    int dim = 0;
    int offset = 0;
  };

  JointGaussian() = default;
  /// `cov` must be square with size equal to the sum of the dims.
  JointGaussian(std::vector<std::pair<std::string, int>> variables,
                Eigen::MatrixXd cov);

  const Eigen::MatrixXd& cov() const { return cov_; }
  const std::vector<Variable>& variables() const { return variables_; }
  bool Has(const std::string& label) const;

  /// Covariance block between two groups of labels (each group stacked in
  /// the given order). Throws ArgumentError for unknown labels.
  Eigen::MatrixXd Block(const std::vector<std::string>& rows,
                        const std::vector<std::string>& cols) const;

 private:
  std::vector<int> Indices(const std::vector<std::string>& group) const;

  std::vector<Variable> variables_;
  Eigen::MatrixXd cov_;
};

/// I[A; B] in nats, ½(log|ΣA|† − log|ΣA|B|†). Returns +infinity when ΣA|B
/// loses rank relative to ΣA. Ranks are taken against λmax(ΣA).
double GaussianMutualInfo(const JointGaussian& joint,
                          const std::vector<std::string>& group_a,
                          const std::vector<std::string>& group_b,
                          const TolerancePolicy& tol = {});

/// Outcome of the three equivalent MMSE characterizations for an estimate x̂
/// of x:
///   cross_equals_cov          Σx̂;x = Σx̂
///   conditional_is_difference Σx|x̂ = Σx − Σx̂
///   regression_is_identity    E[x | x̂] = x̂, with matching rank
struct MmseReport {
  bool cross_equals_cov = false;
  bool conditional_is_difference = false;
  bool regression_is_identity = false;
  double cross_residual = 0.0;
  double conditional_residual = 0.0;
  double regression_residual = 0.0;

  bool all_pass() const {
    return cross_equals_cov && conditional_is_difference && regression_is_identity;
  }
  bool consistent() const {
    return cross_equals_cov == conditional_is_difference &&
           conditional_is_difference == regression_is_identity;
  }
};

/// `cross` is Σx̂;x = E[x̂ xᵀ]. Throws NotPsdError when the joint covariance
/// [[Σx, crossᵀ], [cross, Σx̂]] is not PSD.
MmseReport MmsePropertiesCheck(const Eigen::MatrixXd& cov_x,
                               const Eigen::MatrixXd& cov_xhat,
                               const Eigen::MatrixXd& cross,
                               const TolerancePolicy& tol = {});

/// rank(Σx̂u).
int ControllerOrder(const Eigen::MatrixXd& control_estimate_cov,
                    const TolerancePolicy& tol = {});

/// Stationary-time joint covariance of (x, y, xhat_y, xhat_u, u) implied by
/// the state covariance and the controller's estimator form.
JointGaussian ControllerJoint(const PlantSpec& plant,
                              const Eigen::MatrixXd& state_cov,
                              const ControllerEstimator& est);

/// |I[y; u] − I[x̂y; x̂u]| for the joint from ControllerJoint(). Both infinite
/// counts as agreement (0); exactly one infinite returns +infinity.
double InfoEqualityCheck(const PlantSpec& plant, const Eigen::MatrixXd& state_cov,
                         const ControllerEstimator& est,
                         const TolerancePolicy& tol = {});

/// Stationary second moments of the closed loop (x, u).
struct StationaryXU {
  Eigen::MatrixXd state_cov;
  Eigen::MatrixXd control_cov;
  Eigen::MatrixXd cross;  // E[x uᵀ]
};

/// Closed loop under the raw form: Stein equation in A + B H C.
StationaryXU StationaryJointRaw(const PlantSpec& plant, const ControllerRaw& raw,
                                const TolerancePolicy& tol = {});

/// Closed loop under the estimator form, propagating the estimator
/// covariances and solving the vectorized (Kronecker) linear system.
StationaryXU StationaryJointEstimator(const PlantSpec& plant,
                                      const ControllerEstimator& est,
                                      const TolerancePolicy& tol = {});

}  // namespace minlqg
