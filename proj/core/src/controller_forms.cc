#include "minlqg/controller_forms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "minlqg/errors.h"

namespace minlqg {

using Eigen::MatrixXd;

ControllerRaw EstimatorToRaw(const ControllerEstimator& est) {
  const auto& L = est.feedback_gain;
  if (est.estimator_map.rows() != L.cols() ||
      est.obs_gain.rows() != est.estimator_map.cols() ||
      est.estimator_noise_cov.rows() != L.cols()) {
    throw DimensionError("EstimatorToRaw(): inconsistent dimensions");
  }
  ControllerRaw raw;
  raw.feedback = L * est.estimator_map * est.obs_gain;
  raw.noise_cov = Symmetrize(L * est.estimator_noise_cov * L.transpose());
  return raw;
}

JointGaussian::JointGaussian(std::vector<std::pair<std::string, int>> variables,
                             MatrixXd cov) {
  int offset = 0;
  std::set<std::string> seen;
  for (auto& [label, dim] : variables) {
    if (dim < 0 || !seen.insert(label).second) {
      throw ArgumentError("JointGaussian: bad or duplicate variable '" + label +
                          "'");
    }
    variables_.push_back({label, dim, offset});
    offset += dim;
  }
  if (cov.rows() != offset || cov.cols() != offset) {
    throw DimensionError("JointGaussian: covariance size does not match labels");
  }
  cov_ = Symmetrize(cov);
}

bool JointGaussian::Has(const std::string& label) const {
  return std::any_of(variables_.begin(), variables_.end(),
                     [&](const Variable& v) { return v.label == label; });
}

std::vector<int> JointGaussian::Indices(
    const std::vector<std::string>& group) const {
  std::vector<int> idx;
  for (const auto& label : group) {
    auto it = std::find_if(variables_.begin(), variables_.end(),
                           [&](const Variable& v) { return v.label == label; });
    if (it == variables_.end()) {
      throw ArgumentError("JointGaussian: unknown variable '" + label + "'");
    }
    for (int i = 0; i < it->dim; ++i) idx.push_back(it->offset + i);
  }
  return idx;
}

MatrixXd JointGaussian::Block(const std::vector<std::string>& rows,
                              const std::vector<std::string>& cols) const {
  const std::vector<int> r = Indices(rows);
  const std::vector<int> c = Indices(cols);
  return cov_(r, c);
}

double GaussianMutualInfo(const JointGaussian& joint,
                          const std::vector<std::string>& group_a,
                          const std::vector<std::string>& group_b,
                          const TolerancePolicy& tol) {
  for (const auto& a : group_a) {
    if (std::find(group_b.begin(), group_b.end(), a) != group_b.end()) {
      throw ArgumentError("GaussianMutualInfo(): groups share '" + a + "'");
    }
  }
  std::vector<std::string> both = group_a;
  both.insert(both.end(), group_b.begin(), group_b.end());
  if (!IsNumericallyPsd(joint.Block(both, both), tol)) {
    throw NotPsdError("GaussianMutualInfo(): joint covariance is not PSD");
  }
  const MatrixXd cov_a = joint.Block(group_a, group_a);
  const MatrixXd cov_b = joint.Block(group_b, group_b);
  const MatrixXd cross = joint.Block(group_a, group_b);
  if (cov_a.size() == 0 || cov_b.size() == 0) return 0.0;

  const double scale = std::max(EvdSym(cov_a).values(0), 0.0);
  if (scale == 0.0) return 0.0;
  const MatrixXd conditional =
      Symmetrize(cov_a - cross * PinvPsd(cov_b, tol) * cross.transpose());
  const int rank_a = RankPsd(cov_a, tol, scale);
  const int rank_cond = RankPsd(conditional, tol, scale);
  if (rank_cond < rank_a) return std::numeric_limits<double>::infinity();
  const double info =
      0.5 * (LogPdet(cov_a, tol, scale) - LogPdet(conditional, tol, scale));
  return std::max(info, 0.0);
}

MmseReport MmsePropertiesCheck(const MatrixXd& cov_x, const MatrixXd& cov_xhat,
                               const MatrixXd& cross, const TolerancePolicy& tol) {
  const Eigen::Index n = cov_x.rows();
  if (cov_x.cols() != n || cov_xhat.rows() != n || cov_xhat.cols() != n ||
      cross.rows() != n || cross.cols() != n) {
    throw DimensionError("MmsePropertiesCheck(): x and x̂ must share dimension");
  }
  MatrixXd joint(2 * n, 2 * n);
  joint << cov_x, cross.transpose(), cross, cov_xhat;
  if (!IsNumericallyPsd(joint, tol)) {
    throw NotPsdError("MmsePropertiesCheck(): joint covariance is not PSD");
  }

  MmseReport report;
  report.cross_residual = RelativeResidual(cross, cov_xhat);
  report.cross_equals_cov = report.cross_residual <= tol.res;

  const MatrixXd xhat_pinv = PinvPsd(cov_xhat, tol);
  const MatrixXd conditional =
      Symmetrize(cov_x - cross.transpose() * xhat_pinv * cross);
  report.conditional_residual =
      RelativeResidual(conditional, cov_x - cov_xhat, cov_x.norm());
  report.conditional_is_difference = report.conditional_residual <= tol.res;

  // E[x | x̂] = T x̂ with T = Σx;x̂ Σx̂†. Identity on range(Σx̂) means the
  // error T x̂ − x̂ has zero covariance and T x̂ keeps the rank of x̂.
  const MatrixXd regression = cross.transpose() * xhat_pinv;
  const MatrixXd deviation = regression - MatrixXd::Identity(n, n);
  const MatrixXd error_cov = deviation * cov_xhat * deviation.transpose();
  const double xhat_norm = cov_xhat.norm();
  report.regression_residual =
      xhat_norm == 0.0 ? 0.0 : error_cov.norm() / xhat_norm;
  const double xhat_scale = n > 0 ? EvdSym(cov_xhat).values(0) : 0.0;
  const int rank_xhat = RankPsd(cov_xhat, tol, xhat_scale);
  const int rank_mapped = RankPsd(
      Symmetrize(regression * cov_xhat * regression.transpose()), tol, xhat_scale);
  report.regression_is_identity =
      report.regression_residual <= tol.res && rank_xhat == rank_mapped;
  return report;
}

int ControllerOrder(const MatrixXd& control_estimate_cov, const TolerancePolicy& tol) {
  return RankPsd(control_estimate_cov, tol);
}

JointGaussian ControllerJoint(const PlantSpec& plant, const MatrixXd& state_cov,
                              const ControllerEstimator& est) {
  const int n = plant.state_dim();
  const int k = plant.obs_dim();
  const int l = plant.control_dim();
  const MatrixXd& K = est.obs_gain;
  const MatrixXd& W = est.estimator_map;
  const MatrixXd& L = est.feedback_gain;
  if (K.rows() != n || K.cols() != k || W.rows() != n || W.cols() != n ||
      L.rows() != l || L.cols() != n || state_cov.rows() != n) {
    throw DimensionError("ControllerJoint(): inconsistent dimensions");
  }
  // Every variable is a linear image of the independent sources (x, ε, ω).
  const int dim = n + k + n + n + l;
  MatrixXd T = MatrixXd::Zero(dim, n + k + n);
  T.block(0, 0, n, n).setIdentity();
  T.block(n, 0, k, n) = plant.C;
  T.block(n, n, k, k).setIdentity();
  T.block(n + k, 0, n, n) = K * plant.C;
  T.block(n + k, n, n, k) = K;
  T.block(2 * n + k, 0, n, n) = W * K * plant.C;
  T.block(2 * n + k, n, n, k) = W * K;
  T.block(2 * n + k, n + k, n, n).setIdentity();
  T.block(3 * n + k, 0, l, n + k + n) = L * T.block(2 * n + k, 0, n, n + k + n);

  MatrixXd sources = MatrixXd::Zero(n + k + n, n + k + n);
  sources.block(0, 0, n, n) = state_cov;
  sources.block(n, n, k, k) = plant.observation_noise;
  sources.block(n + k, n + k, n, n) = est.estimator_noise_cov;
  return JointGaussian({{"x", n}, {"y", k}, {"xhat_y", n}, {"xhat_u", n}, {"u", l}},
                       T * sources * T.transpose());
}

double InfoEqualityCheck(const PlantSpec& plant, const MatrixXd& state_cov,
                         const ControllerEstimator& est, const TolerancePolicy& tol) {
  const JointGaussian joint = ControllerJoint(plant, state_cov, est);
  const double raw_info = GaussianMutualInfo(joint, {"y"}, {"u"}, tol);
  const double est_info = GaussianMutualInfo(joint, {"xhat_y"}, {"xhat_u"}, tol);
  if (std::isinf(raw_info) && std::isinf(est_info)) return 0.0;
  if (std::isinf(raw_info) || std::isinf(est_info)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::abs(raw_info - est_info);
}

StationaryXU StationaryJointRaw(const PlantSpec& plant, const ControllerRaw& raw,
                                const TolerancePolicy& tol) {
  const MatrixXd& H = raw.feedback;
  if (H.rows() != plant.control_dim() || H.cols() != plant.obs_dim()) {
    throw DimensionError("StationaryJointRaw(): H has the wrong shape");
  }
  const MatrixXd closed = plant.A + plant.B * H * plant.C;
  if (!(SpectralRadius(closed) < 1.0)) {
    throw NumericalError("StationaryJointRaw(): closed loop A + BHC is unstable");
  }
  const MatrixXd BH = plant.B * H;
  const MatrixXd forcing = BH * plant.observation_noise * BH.transpose() +
                           plant.B * raw.noise_cov * plant.B.transpose() +
                           plant.process_noise;
  StationaryXU out;
  out.state_cov = SolveStein(closed, Symmetrize(forcing), tol);
  const MatrixXd obs_cov =
      plant.C * out.state_cov * plant.C.transpose() + plant.observation_noise;
  out.control_cov = Symmetrize(H * obs_cov * H.transpose() + raw.noise_cov);
  out.cross = out.state_cov * plant.C.transpose() * H.transpose();
  return out;
}

StationaryXU StationaryJointEstimator(const PlantSpec& plant,
                                      const ControllerEstimator& est,
                                      const TolerancePolicy& tol) {
  const int n = plant.state_dim();
  const MatrixXd& A = plant.A;
  const MatrixXd& K = est.obs_gain;
  const MatrixXd& W = est.estimator_map;
  const MatrixXd& L = est.feedback_gain;
  // x̂u = W K (C x + ε) + ω, u = L x̂u, so x' = (A + P) x + noise with
  // P = B L W K C.
  const MatrixXd P = plant.B * L * W * K * plant.C;
  if (!(SpectralRadius(A + P) < 1.0)) {
    throw NumericalError("StationaryJointEstimator(): closed loop is unstable");
  }
  const MatrixXd BLWK = plant.B * L * W * K;
  const MatrixXd BL = plant.B * L;
  const MatrixXd forcing = BLWK * plant.observation_noise * BLWK.transpose() +
                           BL * est.estimator_noise_cov * BL.transpose() +
                           plant.process_noise;
  // vec(X Y Zᵀ) = (Z ⊗ X) vec(Y).
  auto kron = [](const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
      }
    }
    return out;
  };
  const MatrixXd op = kron(A, A) + kron(P, A) + kron(A, P) + kron(P, P);
  const MatrixXd system = MatrixXd::Identity(n * n, n * n) - op;
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(forcing.data(), n * n);
  const Eigen::VectorXd sol = system.partialPivLu().solve(rhs);
  StationaryXU out;
  out.state_cov = Symmetrize(Eigen::Map<const MatrixXd>(sol.data(), n, n));
  const double residual = RelativeResidual(
      out.state_cov,
      (A + P) * out.state_cov * (A + P).transpose() + forcing, forcing.norm());
  if (residual > tol.res) {
    throw NumericalError("StationaryJointEstimator(): linear solve inaccurate");
  }
  const MatrixXd obs_cov =
      plant.C * out.state_cov * plant.C.transpose() + plant.observation_noise;
  const MatrixXd xhat_u_cov =
      W * K * obs_cov * K.transpose() * W.transpose() + est.estimator_noise_cov;
  out.control_cov = Symmetrize(L * xhat_u_cov * L.transpose());
  out.cross = out.state_cov * plant.C.transpose() * K.transpose() *
              W.transpose() * L.transpose();
  return out;
}

}  // namespace minlqg
