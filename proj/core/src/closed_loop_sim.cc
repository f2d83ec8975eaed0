#include "minlqg/closed_loop_sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <type_traits>

#include "minlqg/errors.h"

namespace minlqg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd ClosedLoopMatrix(const PlantSpec& plant, const SimController& controller) {
  return std::visit(
      [&](const auto& c) -> MatrixXd {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ControllerRaw>) {
          return plant.A + plant.B * c.feedback * plant.C;
        } else if constexpr (std::is_same_v<T, ControllerEstimator>) {
          return plant.A + plant.B * c.feedback_gain * c.estimator_map * c.obs_gain * plant.C;
        } else {
          return plant.A + plant.B * c.controller.feedback_gain * c.channel.decoder *
                               c.channel.encoder * c.controller.obs_gain * plant.C;
        }
      },
      controller);
}

// Independent Gaussian stream with covariance F Fᵀ.
class GaussianSource {
 public:
  GaussianSource(std::uint64_t seed, std::uint32_t stream, const MatrixXd& cov)
      : factor_(cov.size() ? SqrtPsd(cov) : MatrixXd(cov)),
        draw_(cov.rows()),
        out_(cov.rows()) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32), stream};
    rng_.seed(seq);
  }

  const VectorXd& Next() {
    for (Eigen::Index i = 0; i < draw_.size(); ++i) draw_(i) = normal_(rng_);
    out_.noalias() = factor_ * draw_;
    return out_;
  }

 private:
  MatrixXd factor_;
  VectorXd draw_;
  VectorXd out_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

void CheckShapes(const PlantSpec& plant, const SimController& controller) {
  const Eigen::Index n = plant.state_dim(), k = plant.obs_dim(), l = plant.control_dim();
  bool ok = true;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ControllerRaw>) {
          ok = c.feedback.rows() == l && c.feedback.cols() == k &&
               c.noise_cov.rows() == l && c.noise_cov.cols() == l;
        } else {
          const ControllerEstimator& e = [&]() -> const ControllerEstimator& {
            if constexpr (std::is_same_v<T, ControllerEstimator>) {
              return c;
            } else {
              return c.controller;
            }
          }();
          ok = e.obs_gain.rows() == n && e.obs_gain.cols() == k &&
               e.feedback_gain.rows() == l && e.feedback_gain.cols() == n;
          if constexpr (std::is_same_v<T, ControllerEstimator>) {
            ok = ok && e.estimator_map.rows() == n && e.estimator_map.cols() == n &&
                 e.estimator_noise_cov.rows() == n;
          } else {
            const Eigen::Index m = c.channel.active_dim();
            ok = ok && c.channel.encoder.rows() == m && c.channel.encoder.cols() == n &&
                 c.channel.decoder.rows() == n && c.channel.decoder.cols() == m &&
                 c.channel.noise_cov.rows() == m;
          }
        }
      },
      controller);
  if (!ok) throw DimensionError("Rollout(): controller does not match the plant");
}

}  // namespace

std::int64_t DefaultBurnIn(const PlantSpec& plant, const SimController& controller) {
  const double rho = SpectralRadius(ClosedLoopMatrix(plant, controller));
  std::int64_t burn = 10000;
  if (rho < 1.0) {
    burn = std::max<std::int64_t>(burn, static_cast<std::int64_t>(std::ceil(50.0 / (1.0 - rho))));
  }
  return burn;
}

SimStats::SimStats(std::vector<std::pair<std::string, int>> variables, int batches)
    : variables_(std::move(variables)) {
  for (const auto& [label, d] : variables_) dim_ += d;
  sum_ = MatrixXd::Zero(dim_, dim_);
  comp_ = MatrixXd::Zero(dim_, dim_);
  batches_.resize(std::max(batches, 1));
  for (auto& b : batches_) b.zz = MatrixXd::Zero(dim_, dim_);
}

void SimStats::Add(const VectorXd& z, double cost, int batch) {
  for (int j = 0; j < dim_; ++j) {
    for (int i = 0; i <= j; ++i) {
      const double y = z(i) * z(j) - comp_(i, j);
      const double t = sum_(i, j) + y;
      comp_(i, j) = (t - sum_(i, j)) - y;
      sum_(i, j) = t;
    }
  }
  const double y = cost - cost_comp_;
  const double t = cost_sum_ + y;
  cost_comp_ = (t - cost_sum_) - y;
  cost_sum_ = t;

  Batch& b = batches_.at(batch);
  for (int j = 0; j < dim_; ++j) {
    for (int i = 0; i <= j; ++i) b.zz(i, j) += z(i) * z(j);
  }
  b.cost += cost;
  ++b.count;
  ++count_;
}

namespace {

MatrixXd FillLower(MatrixXd m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) m(i, j) = m(j, i);
  }
  return m;
}

}  // namespace

MatrixXd SimStats::SecondMoment() const {
  if (count_ == 0) return MatrixXd::Zero(dim_, dim_);
  return FillLower(sum_ - comp_) / static_cast<double>(count_);
}

MatrixXd SimStats::SecondMomentSe() const {
  std::vector<MatrixXd> means;
  for (const auto& b : batches_) {
    if (b.count > 0) means.push_back(FillLower(b.zz) / static_cast<double>(b.count));
  }
  const size_t nb = means.size();
  if (nb < 2) return MatrixXd::Constant(dim_, dim_, std::numeric_limits<double>::infinity());
  MatrixXd avg = MatrixXd::Zero(dim_, dim_);
  for (const auto& m : means) avg += m;
  avg /= static_cast<double>(nb);
  MatrixXd var = MatrixXd::Zero(dim_, dim_);
  for (const auto& m : means) var += (m - avg).cwiseAbs2();
  var /= static_cast<double>(nb - 1);
  return (var / static_cast<double>(nb)).cwiseSqrt();
}

double SimStats::CostRate() const {
  return count_ == 0 ? 0.0 : (cost_sum_ - cost_comp_) / static_cast<double>(count_);
}

double SimStats::CostRateSe() const {
  std::vector<double> means;
  for (const auto& b : batches_) {
    if (b.count > 0) means.push_back(b.cost / static_cast<double>(b.count));
  }
  const size_t nb = means.size();
  if (nb < 2) return std::numeric_limits<double>::infinity();
  double avg = 0.0;
  for (double m : means) avg += m;
  avg /= static_cast<double>(nb);
  double var = 0.0;
  for (double m : means) var += (m - avg) * (m - avg);
  var /= static_cast<double>(nb - 1);
  return std::sqrt(var / static_cast<double>(nb));
}

std::vector<int> SimStats::Indices(const std::string& label) const {
  int offset = 0;
  for (const auto& [name, d] : variables_) {
    if (name == label) {
      std::vector<int> idx(d);
      for (int i = 0; i < d; ++i) idx[i] = offset + i;
      return idx;
    }
    offset += d;
  }
  throw ArgumentError("SimStats: variable '" + label + "' was not recorded");
}

MatrixXd SimStats::Block(const std::string& a, const std::string& b) const {
  return SecondMoment()(Indices(a), Indices(b));
}

MatrixXd SimStats::BlockSe(const std::string& a, const std::string& b) const {
  return SecondMomentSe()(Indices(a), Indices(b));
}

JointGaussian SimStats::Joint() const { return JointGaussian(variables_, SecondMoment()); }

JointGaussian SimStats::BatchJoint(int batch) const {
  const Batch& b = batches_.at(batch);
  if (b.count == 0) return JointGaussian(variables_, MatrixXd::Zero(dim_, dim_));
  return JointGaussian(variables_, FillLower(b.zz) / static_cast<double>(b.count));
}

SimStats SimStats::Merge(const SimStats& a, const SimStats& b) {
  if (a.variables_ != b.variables_) {
    throw ArgumentError("SimStats::Merge(): recorded variables differ");
  }
  SimStats out = a;
  out.sum_ = (a.sum_ - a.comp_) + (b.sum_ - b.comp_);
  out.comp_.setZero();
  out.cost_sum_ = (a.cost_sum_ - a.cost_comp_) + (b.cost_sum_ - b.cost_comp_);
  out.cost_comp_ = 0.0;
  out.count_ = a.count_ + b.count_;
  out.batches_.insert(out.batches_.end(), b.batches_.begin(), b.batches_.end());
  return out;
}

SimStats Rollout(const PlantSpec& plant, const CostSpec& cost,
                 const SimController& controller, const SimConfig& cfg) {
  CheckShapes(plant, controller);
  const std::int64_t burn = cfg.burn_in < 0 ? DefaultBurnIn(plant, controller) : cfg.burn_in;
  if (cfg.horizon <= burn || cfg.batches < 1) {
    throw ArgumentError("Rollout(): horizon must exceed burn-in");
  }
  const int n = plant.state_dim(), k = plant.obs_dim(), l = plant.control_dim();

  const auto* raw = std::get_if<ControllerRaw>(&controller);
  const auto* est = std::get_if<ControllerEstimator>(&controller);
  const auto* pipe = std::get_if<ChannelPipeline>(&controller);
  const ControllerEstimator* gains = est ? est : (pipe ? &pipe->controller : nullptr);
  const int m = pipe ? pipe->channel.active_dim() : 0;

  std::vector<std::pair<std::string, int>> vars;
  if (!cfg.record_joint) {
    vars = {{"x", n}, {"u", l}};
  } else if (raw) {
    vars = {{"x", n}, {"y", k}, {"u", l}};
  } else {
    vars = {{"x", n}, {"y", k}, {"xhat_y", n}, {"xhat_u", n}, {"u", l}};
    if (pipe) vars.push_back({"w", m});
  }
  SimStats stats(vars, cfg.batches);

  MatrixXd control_noise;
  if (raw) control_noise = raw->noise_cov;
  else if (est) control_noise = est->estimator_noise_cov;
  else control_noise = pipe->channel.noise_cov;

  GaussianSource process(cfg.seed, 0, plant.process_noise);
  GaussianSource observation(cfg.seed, 1, plant.observation_noise);
  GaussianSource actuation(cfg.seed, 2, control_noise);

  VectorXd x = VectorXd::Zero(n), y(k), u(l), xy(n), xu(n), w(m), next(n);
  VectorXd z(stats.dim());
  const std::int64_t kept = cfg.horizon - burn;

  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    y.noalias() = plant.C * x;
    y += observation.Next();
    if (raw) {
      u.noalias() = raw->feedback * y;
      u += actuation.Next();
    } else {
      xy.noalias() = gains->obs_gain * y;
      if (est) {
        xu.noalias() = est->estimator_map * xy;
        xu += actuation.Next();
      } else {
        w.noalias() = pipe->channel.encoder * xy;
        const VectorXd noisy = w + actuation.Next();
        xu.noalias() = pipe->channel.decoder * noisy;
      }
      u.noalias() = gains->feedback_gain * xu;
    }

    if (t >= burn) {
      const double step_cost = 0.5 * (x.dot(cost.Q * x) + u.dot(cost.R * u));
      int offset = 0;
      for (const auto& [label, d] : vars) {
        const VectorXd* src = nullptr;
        if (label == "x") src = &x;
        else if (label == "y") src = &y;
        else if (label == "u") src = &u;
        else if (label == "xhat_y") src = &xy;
        else if (label == "xhat_u") src = &xu;
        else src = &w;
        z.segment(offset, d) = *src;
        offset += d;
      }
      const std::int64_t idx = t - burn;
      const int batch = static_cast<int>((idx * cfg.batches) / kept);
      stats.Add(z, step_cost, batch);
    }

    next.noalias() = plant.A * x;
    next.noalias() += plant.B * u;
    next += process.Next();
    x.swap(next);
    if (!(x.norm() <= 1e12)) {
      throw NumericalError("Rollout(): trajectory diverged at step " + std::to_string(t));
    }
  }
  return stats;
}

double EmpiricalInfo(const SimStats& stats, const std::string& a, const std::string& b,
                     const TolerancePolicy& tol) {
  const JointGaussian joint = stats.Joint();
  if (!joint.Has(a) || !joint.Has(b)) {
    throw ArgumentError("EmpiricalInfo(): pair (" + a + ", " + b + ") was not recorded");
  }
  return GaussianMutualInfo(joint, {a}, {b}, tol);
}

double EmpiricalInfoSe(const SimStats& stats, const std::string& a, const std::string& b,
                       const TolerancePolicy& tol) {
  EmpiricalInfo(stats, a, b, tol);  // label check
  std::vector<double> values;
  for (int i = 0; i < stats.batch_count(); ++i) {
    const JointGaussian joint = stats.BatchJoint(i);
    if (joint.cov().isZero(0.0)) continue;
    const double v = GaussianMutualInfo(joint, {a}, {b}, tol);
    if (std::isfinite(v)) values.push_back(v);
  }
  const size_t nb = values.size();
  if (nb < 2) return std::numeric_limits<double>::infinity();
  double avg = 0.0;
  for (double v : values) avg += v;
  avg /= static_cast<double>(nb);
  double var = 0.0;
  for (double v : values) var += (v - avg) * (v - avg);
  var /= static_cast<double>(nb - 1);
  return std::sqrt(var / static_cast<double>(nb));
}

}  // namespace minlqg
