#include "minlqg/matched_channel.h"

#include <cmath>
#include <limits>
#include <vector>

#include "minlqg/errors.h"

namespace minlqg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatchedChannel BuildMatchedChannel(const MatrixXd& estimate_cov, const MatrixXd& modes,
                                   const VectorXd& active_coeffs,
                                   const TolerancePolicy& tol) {
  const Eigen::Index n = estimate_cov.rows();
  if (estimate_cov.cols() != n || modes.rows() != n || modes.cols() != n ||
      active_coeffs.size() != n) {
    throw DimensionError("BuildMatchedChannel(): inconsistent dimensions");
  }
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (active_coeffs(i) > 0.0) active.push_back(i);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(active.size());
  const MatrixXd V = modes(Eigen::all, active);
  VectorXd d(m);
  for (Eigen::Index j = 0; j < m; ++j) d(j) = active_coeffs(active[j]);

  const PsdRoot root = SqrtPsdWithPinv(estimate_cov, tol);
  const VectorXd sqrt_d = d.cwiseSqrt();
  MatchedChannel ch;
  ch.active_coeffs = d;
  ch.encoder = sqrt_d.asDiagonal() * V.transpose() * root.pinv_root;
  ch.decoder = root.root * V * sqrt_d.asDiagonal();
  ch.noise_cov = MatrixXd((VectorXd::Ones(m) - d).asDiagonal());
  return ch;
}

MatchedChannel BuildMatchedChannel(const FixedPointState& state,
                                   const TolerancePolicy& tol) {
  return BuildMatchedChannel(state.obs.estimate_cov, state.modes, state.active_coeffs,
                             tol);
}

double ChannelCapacity(const MatchedChannel& channel, const MatrixXd& estimate_cov) {
  if (channel.active_dim() == 0) return 0.0;
  const MatrixXd input = channel.encoder * estimate_cov * channel.encoder.transpose();
  const MatrixXd output = Symmetrize(input + channel.noise_cov);
  Eigen::LLT<MatrixXd> out_llt(output);
  Eigen::LLT<MatrixXd> noise_llt(Symmetrize(channel.noise_cov));
  if (noise_llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  if (out_llt.info() != Eigen::Success) {
    throw NumericalError("ChannelCapacity(): output covariance is not positive definite");
  }
  auto logdet = [](const Eigen::LLT<MatrixXd>& llt) {
    return 2.0 * MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  };
  return 0.5 * (logdet(out_llt) - logdet(noise_llt));
}

ChannelReport CheckChannelProperties(const MatchedChannel& ch,
                                     const FixedPointState& state,
                                     const TolerancePolicy& tol, double capacity_tol) {
  ChannelReport r;
  const Eigen::Index m = ch.active_dim();
  const MatrixXd& sxy = state.obs.estimate_cov;
  const ControllerEstimator est = EstimatorForm(state, tol);
  r.info_rate = InfoRate(state);

  const MatrixXd D = ch.active_coeffs.asDiagonal();
  const MatrixXd input = ch.encoder * sxy * ch.encoder.transpose();
  const MatrixXd output = Symmetrize(input + ch.noise_cov);
  const MatrixXd I = MatrixXd::Identity(m, m);
  r.input_cov = RelativeResidual(input, D);
  r.output_cov = RelativeResidual(output, I);
  if (m > 0) {
    r.kl_quadratic = RelativeResidual(output.llt().solve(I), I);
  }
  r.decoder_cov = RelativeResidual(ch.decoder * output * ch.decoder.transpose(),
                                   state.control_estimate_cov);
  r.estimator_map = RelativeResidual(ch.decoder * ch.encoder, est.estimator_map);
  r.estimator_noise = RelativeResidual(
      ch.decoder * ch.noise_cov * ch.decoder.transpose(), est.estimator_noise_cov);
  r.capacity = ChannelCapacity(ch, sxy);
  r.capacity_gap = (std::isinf(r.capacity) && std::isinf(r.info_rate))
                       ? 0.0
                       : std::abs(r.capacity - r.info_rate);

  auto require = [&](double value, double limit, const char* name) {
    if (!(value <= limit)) r.failures.emplace_back(name);
  };
  require(r.input_cov, tol.res, "input covariance equals D");
  require(r.output_cov, tol.res, "output covariance equals I");
  require(r.kl_quadratic, tol.res, "KL divergence quadratic in w");
  require(r.decoder_cov, tol.res, "decoder reproduces control estimate covariance");
  require(r.estimator_map, tol.res, "decoder∘encoder reproduces W");
  require(r.estimator_noise, tol.res, "channel noise reproduces Σω");
  require(r.capacity_gap, capacity_tol, "capacity equals information rate");
  return r;
}

}  // namespace minlqg
