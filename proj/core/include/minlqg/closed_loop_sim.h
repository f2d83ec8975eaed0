#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "minlqg/controller_forms.h"
#include "minlqg/matched_channel.h"
#include "minlqg/plant_model.h"

namespace minlqg {

/// Estimator-form controller with the x̂y → x̂u step realized by a matched
/// channel: w = E x̂y, ŵ = w + v, x̂u = G ŵ, u = L x̂u.
struct ChannelPipeline {
  ControllerEstimator controller;  // K and L are used; W and Σω come from the channel
  MatchedChannel channel;
};

using SimController = std::variant<ControllerRaw, ControllerEstimator, ChannelPipeline>;

struct SimConfig {
  std::int64_t horizon = 100000;  // total steps including burn-in
  std::int64_t burn_in = -1;      // < 0 selects DefaultBurnIn()
  std::uint64_t seed = 0;
  bool record_joint = true;
  int batches = 20;
};

/// max(10⁴, 50 / (1 − ρ)) with ρ the closed-loop spectral radius.
std::int64_t DefaultBurnIn(const PlantSpec& plant, const SimController& controller);

/// Single-pass second moments of the recorded variables. Sums are kept
/// (compensated) so that two runs can be merged.
class SimStats {
 public:
  SimStats() = default;
  SimStats(std::vector<std::pair<std::string, int>> variables, int batches);

  const std::vector<std::pair<std::string, int>>& variables() const { return variables_; }
  std::int64_t count() const { return count_; }
  int dim() const { return dim_; }

  void Add(const Eigen::VectorXd& z, double cost, int batch);

  /// E[z zᵀ] over the kept steps (the process is zero mean).
  Eigen::MatrixXd SecondMoment() const;
  /// Batch-means standard error of every entry of SecondMoment().
  Eigen::MatrixXd SecondMomentSe() const;
  Eigen::MatrixXd Block(const std::string& a, const std::string& b) const;
  Eigen::MatrixXd BlockSe(const std::string& a, const std::string& b) const;

  double CostRate() const;
  double CostRateSe() const;

  JointGaussian Joint() const;

  int batch_count() const { return static_cast<int>(batches_.size()); }
  /// Second moments of one batch alone; empty batches give a zero matrix.
  JointGaussian BatchJoint(int batch) const;

  /// Combines two runs over the same variables; batches are concatenated.
  static SimStats Merge(const SimStats& a, const SimStats& b);

 private:
  struct Batch {
    std::int64_t count = 0;
    Eigen::MatrixXd zz;
    double cost = 0.0;
  };

  std::vector<int> Indices(const std::string& label) const;

  std::vector<std::pair<std::string, int>> variables_;
  int dim_ = 0;
  std::int64_t count_ = 0;
  Eigen::MatrixXd sum_;
  Eigen::MatrixXd comp_;
  double cost_sum_ = 0.0;
  double cost_comp_ = 0.0;
  std::vector<Batch> batches_;
};

/// Simulates x₀ = 0 for cfg.horizon steps and accumulates statistics after
/// the burn-in. Recorded variables: (x, y, u) for the raw form,
/// (x, y, xhat_y, xhat_u, u) for the estimator form, plus w for the channel
/// form; only (x, u) when record_joint is false. Throws NumericalError if
/// ‖x‖ exceeds 1e12.
SimStats Rollout(const PlantSpec& plant, const CostSpec& cost,
                 const SimController& controller, const SimConfig& cfg);

/// Gaussian plug-in I[a; b] from the empirical joint second moments.
double EmpiricalInfo(const SimStats& stats, const std::string& a, const std::string& b,
                     const TolerancePolicy& tol = {});

/// Batch-means standard error of EmpiricalInfo(); +infinity with fewer than
/// two batches of finite information.
double EmpiricalInfoSe(const SimStats& stats, const std::string& a, const std::string& b,
                       const TolerancePolicy& tol = {});

}  // namespace minlqg
