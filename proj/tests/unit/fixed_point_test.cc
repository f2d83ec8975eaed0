#include "minlqg/fixed_point.h"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "minlqg/errors.h"
#include "minlqg/tradeoff.h"
#include "oracles/frozen_values.h"
#include "oracles/random_instances.h"
#include "oracles/scalar_oracle.h"

namespace minlqg {
namespace {

using Eigen::MatrixXd;
namespace fz = oracle::frozen;

double Max(const std::map<std::string, double>& m) {
  double out = 0.0;
  for (const auto& [name, v] : m) out = std::max(out, v);
  return out;
}

TEST(BetaZeroState, ScalarClosedForms) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  const FixedPointState s = BetaZeroState(p.plant, p.cost);
  EXPECT_NEAR(s.state_cov(0, 0), fz::kZeroStateVar, 1e-12);
  EXPECT_NEAR(s.S(0, 0), fz::kZeroCostToGo, 1e-12);
  EXPECT_NEAR(s.L(0, 0), fz::kZeroGain, 1e-12);
  EXPECT_NEAR(s.N(0, 0), fz::kZeroN, 1e-12);
  EXPECT_TRUE(s.control_estimate_cov.isZero(0.0));
  EXPECT_TRUE(s.M.isZero(1e-14));
  EXPECT_EQ(s.order(), 0);
  EXPECT_LT(Max(Residuals(p.plant, p.cost, s)), 1e-10);
}

TEST(ForwardStep, ZeroEstimateGivesOpenLoop) {
  std::mt19937_64 rng(3);
  const oracle::Problem p = oracle::RandomStableProblem(rng);
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  s.state_cov = MatrixXd::Identity(p.plant.state_dim(), p.plant.state_dim());
  s.L = MatrixXd::Random(p.plant.control_dim(), p.plant.state_dim());
  ForwardStep(p.plant, &s);
  EXPECT_LT(RelativeResidual(s.state_cov, UncontrolledLyapunov(p.plant)), 1e-10);
}

TEST(ForwardStep, ScalarFullEstimate) {
  // Σx̂u = Σx̂y = Σx under full observation: Σx = (a + bL)² Σx + σ².
  const oracle::Problem p = oracle::ScalarBenchmark();
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  s.L(0, 0) = fz::kZeroGain;
  for (int i = 0; i < 200; ++i) {
    s.control_estimate_cov = s.obs.estimate_cov;
    ForwardStep(p.plant, &s, StepMode::kSingleSweep);
  }
  const double f = 0.9 + fz::kZeroGain;
  EXPECT_NEAR(s.state_cov(0, 0), 1.0 / (1.0 - f * f), 1e-10);
}

TEST(ForwardStep, MemorylessDynamics) {
  oracle::Problem p = oracle::ScalarBenchmark();
  p.plant.A(0, 0) = 0.0;
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  s.L(0, 0) = -0.5;
  s.control_estimate_cov(0, 0) = 0.4;
  ForwardStep(p.plant, &s, StepMode::kSingleSweep);
  EXPECT_NEAR(s.state_cov(0, 0), 0.25 * 0.4 + 1.0, 1e-14);
}

TEST(BackwardStep, ZeroEstimateGivesDualLyapunov) {
  std::mt19937_64 rng(5);
  const oracle::Problem p = oracle::RandomStableProblem(rng);
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  BackwardStep(p.plant, p.cost, &s, 0.7);
  EXPECT_TRUE(s.M.isZero(1e-12));
  EXPECT_LT(RelativeResidual(s.S, DualLyapunov(p.plant, p.cost)), 1e-10);
}

TEST(WaterfillStep, ScalarFromBetaZero) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  WaterfillStep(&s, 0.1);
  EXPECT_NEAR(s.mode_values(0), fz::kZeroLambda, 1e-10);
  const double d = 1.0 - 1.0 / (0.1 * fz::kZeroLambda);
  EXPECT_NEAR(s.active_coeffs(0), d, 1e-12);
  EXPECT_NEAR(s.active_coeffs(0), 0.469642, 1e-6);
  EXPECT_NEAR(s.control_estimate_cov(0, 0), d * fz::kZeroStateVar, 1e-10);
}

TEST(WaterfillStep, BelowThresholdAndNoValue) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  WaterfillStep(&s, 0.99 * fz::kFirstCriticalBeta);
  EXPECT_EQ(s.order(), 0);
  EXPECT_TRUE(s.control_estimate_cov.isZero(0.0));

  s.N.setZero();
  WaterfillStep(&s, 10.0);
  EXPECT_EQ(s.order(), 0);
  EXPECT_TRUE(s.Z.isZero(0.0));
}

TEST(WaterfillStep, InfiniteBeta) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  WaterfillStep(&s, std::numeric_limits<double>::infinity());
  EXPECT_EQ(s.active_coeffs(0), 1.0);
  EXPECT_LT(RelativeResidual(s.control_estimate_cov, s.obs.estimate_cov), 1e-14);
}

TEST(SolveFixedPoint, BetaZeroReturnsOrderZero) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  const SolveReport r = SolveFixedPoint(p.plant, p.cost, 0.0);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.state.order(), 0);
  EXPECT_EQ(r.info_rate, 0.0);
  EXPECT_NEAR(r.cost_rate, fz::kZeroCost, 1e-12);
}

struct ScalarCase {
  double beta, d, state_var, S, L, N, M, lam, info, cost;
};

class ScalarFixedPoint : public ::testing::TestWithParam<ScalarCase> {};

TEST_P(ScalarFixedPoint, MatchesFrozenOracle) {
  const ScalarCase c = GetParam();
  const oracle::Problem p = oracle::ScalarBenchmark();
  const SolveReport r = SolveFixedPoint(p.plant, p.cost, c.beta);
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_LT(r.max_residual(), 1e-8);
  const FixedPointState& s = r.state;
  EXPECT_NEAR(s.active_coeffs(0), c.d, 1e-8);
  EXPECT_NEAR(s.state_cov(0, 0), c.state_var, 1e-8 * c.state_var);
  EXPECT_NEAR(s.S(0, 0), c.S, 1e-8 * c.S);
  EXPECT_NEAR(s.L(0, 0), c.L, 1e-8);
  EXPECT_NEAR(s.N(0, 0), c.N, 1e-8 * c.N);
  EXPECT_NEAR(s.M(0, 0), c.M, 1e-8);
  EXPECT_NEAR(s.mode_values(0), c.lam, 1e-8 * c.lam);
  EXPECT_NEAR(r.info_rate, c.info, 1e-9);
  EXPECT_NEAR(r.cost_rate, c.cost, 1e-9);
  EXPECT_NEAR(r.lagrangian, r.info_rate / c.beta + r.cost_rate, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(
    FrozenBetas, ScalarFixedPoint,
    ::testing::Values(
        ScalarCase{fz::kB006Beta, fz::kB006D, fz::kB006StateVar, fz::kB006S, fz::kB006L,
                   fz::kB006N, fz::kB006M, fz::kB006Lam, fz::kB006Info, fz::kB006Cost},
        ScalarCase{fz::kB01Beta, fz::kB01D, fz::kB01StateVar, fz::kB01S, fz::kB01L,
                   fz::kB01N, fz::kB01M, fz::kB01Lam, fz::kB01Info, fz::kB01Cost},
        ScalarCase{fz::kB1Beta, fz::kB1D, fz::kB1StateVar, fz::kB1S, fz::kB1L,
                   fz::kB1N, fz::kB1M, fz::kB1Lam, fz::kB1Info, fz::kB1Cost},
        ScalarCase{fz::kB10Beta, fz::kB10D, fz::kB10StateVar, fz::kB10S, fz::kB10L,
                   fz::kB10N, fz::kB10M, fz::kB10Lam, fz::kB10Info, fz::kB10Cost}));

TEST(SolveFixedPoint, RuntimeOracleAgrees) {
  const oracle::ScalarPlant sp;
  const oracle::Problem p = oracle::ScalarBenchmark();
  for (double beta : {0.07, 0.3, 3.0}) {
    const oracle::ScalarSolution o = oracle::FixedPoint(sp, beta);
    ASSERT_TRUE(o.found) << beta;
    const SolveReport r = SolveFixedPoint(p.plant, p.cost, beta);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.state.active_coeffs(0), o.d, 1e-7) << beta;
    EXPECT_NEAR(r.info_rate, o.info, 1e-7) << beta;
    EXPECT_NEAR(r.cost_rate, o.cost, 1e-7) << beta;
  }
}

TEST(SolveFixedPoint, JustAboveFirstCriticalBeta) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  const SolveReport below = SolveFixedPoint(p.plant, p.cost, 0.999 * fz::kFirstCriticalBeta);
  EXPECT_EQ(below.state.order(), 0);
  EXPECT_EQ(below.info_rate, 0.0);
  const SolveReport above = SolveFixedPoint(p.plant, p.cost, 1.01 * fz::kFirstCriticalBeta);
  ASSERT_TRUE(above.converged);
  EXPECT_EQ(above.state.order(), 1);
  EXPECT_GT(above.info_rate, 0.0);
}

TEST(SolveFixedPoint, WarmStartAgreesWithColdStart) {
  const oracle::Problem p = oracle::TwoStateProblem();
  const SolveReport cold = SolveFixedPoint(p.plant, p.cost, 1.0);
  ASSERT_TRUE(cold.converged);
  const SolveReport warm = SolveFixedPoint(p.plant, p.cost, 1.05, cold.state);
  ASSERT_TRUE(warm.converged);
  const SolveReport cold2 = SolveFixedPoint(p.plant, p.cost, 1.05);
  EXPECT_NEAR(warm.lagrangian, cold2.lagrangian, 1e-8);
}

TEST(Residuals, DetectsPerturbedEstimate) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  const SolveReport r = SolveFixedPoint(p.plant, p.cost, 0.1);
  ASSERT_TRUE(r.converged);
  FixedPointState bumped = r.state;
  bumped.control_estimate_cov *= 1.01;
  EXPECT_GT(Residuals(p.plant, p.cost, bumped).at("control_estimate_cov"), 1e-3);
}

TEST(Residuals, RandomSolvesSatisfyStationarity) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 6; ++trial) {
    const oracle::Problem p = oracle::RandomStableProblem(rng);
    const SolveReport z = BetaZeroSolution(p.plant, p.cost);
    const double beta = 3.0 / z.state.mode_values(0);
    const SolveReport r = SolveFixedPoint(p.plant, p.cost, beta, z.state);
    ASSERT_TRUE(r.converged) << r.message;
    EXPECT_LT(r.residuals.at("stationarity"), 1e-8);
    EXPECT_LT(r.max_residual(), 1e-8);
  }
}

TEST(LagrangianValue, OrderZeroStructure) {
  oracle::Problem p = oracle::ScalarBenchmark();
  FixedPointState s = BetaZeroState(p.plant, p.cost);
  const double half_trace = 0.5 * (s.S * p.plant.process_noise).trace();
  EXPECT_NEAR(LagrangianValue(p.plant, p.cost, s, 0.5), half_trace, 1e-12);
  p.plant.process_noise *= 2.0;
  EXPECT_NEAR(LagrangianValue(p.plant, p.cost, s, 0.5), 2.0 * half_trace, 1e-12);
}

TEST(InfoRate, Examples) {
  FixedPointState s;
  s.active_coeffs = Eigen::VectorXd::Zero(2);
  EXPECT_EQ(InfoRate(s), 0.0);
  s.active_coeffs = Eigen::Vector2d(0.5, 0.0);
  EXPECT_NEAR(InfoRate(s), 0.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(InfoRate(s), 0.346574, 1e-6);
  s.active_coeffs(0) = 1.0;
  EXPECT_TRUE(std::isinf(InfoRate(s)));
}

TEST(InfoRate, AgreesWithPdetAndJointForm) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  const SolveReport r = SolveFixedPoint(p.plant, p.cost, 0.1);
  ASSERT_TRUE(r.converged);
  EXPECT_NEAR(InfoRate(r.state), InfoRatePdet(r.state), 1e-10);
  const JointGaussian j = ControllerJoint(p.plant, r.state.state_cov, r.controller);
  EXPECT_NEAR(InfoRate(r.state), GaussianMutualInfo(j, {"xhat_y"}, {"xhat_u"}), 1e-10);
}

TEST(CostRate, MatchesExpectedCostRate) {
  const oracle::Problem p = oracle::TwoStateProblem();
  const SolveReport r = SolveFixedPoint(p.plant, p.cost, 5.0);
  ASSERT_TRUE(r.converged);
  const MatrixXd su = r.state.L * r.state.control_estimate_cov * r.state.L.transpose();
  EXPECT_NEAR(CostRate(p.cost, r.state), ExpectedCostRate(p.cost, r.state.state_cov, su), 1e-14);
}

TEST(EstimatorForm, MapsEstimateCovariance) {
  const oracle::Problem p = oracle::TwoStateProblem();
  const SolveReport r = SolveFixedPoint(p.plant, p.cost, 5.0);
  ASSERT_TRUE(r.converged);
  const ControllerEstimator& e = r.controller;
  const MatrixXd& sxy = r.state.obs.estimate_cov;
  const MatrixXd implied = e.estimator_map * sxy * e.estimator_map.transpose() +
                           e.estimator_noise_cov;
  EXPECT_LT(RelativeResidual(implied, r.state.control_estimate_cov), 1e-10);
  // x̂u is an MMSE estimate of x̂y.
  const MmseReport mmse = MmsePropertiesCheck(sxy, r.state.control_estimate_cov,
                                              e.estimator_map * sxy);
  EXPECT_TRUE(mmse.all_pass());
}

TEST(ResidualTolerance, RisesOnlyNearSaturation) {
  FixedPointState s;
  s.beta = 1.0;
  s.active_coeffs = Eigen::Vector2d(0.9, 0.0);
  EXPECT_EQ(ResidualTolerance(s), 1e-8);
  s.active_coeffs(0) = 1.0 - 1e-7;
  EXPECT_NEAR(ResidualTolerance(s), 64 * 2.220446049250313e-16 / 1e-7, 1e-12);
  s.beta = std::numeric_limits<double>::infinity();
  s.active_coeffs(0) = 1.0;
  EXPECT_EQ(ResidualTolerance(s), 1e-8);
}

TEST(SolveFixedPoint, ConvergesAtVeryLargeBeta) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 4; ++i) {
    const oracle::Problem p = oracle::FullObservationProblem(rng, 1 + i);
    const SolveReport r = SolveFixedPoint(p.plant, p.cost, 1e6);
    ASSERT_TRUE(r.converged) << i << " " << r.message;
    EXPECT_LT(r.max_residual(), ResidualTolerance(r.state));
  }
}

TEST(SolverConfig, RejectsBadValues) {
  SolverConfig c;
  c.damping = 0.0;
  EXPECT_THROW(c.Validate(), ArgumentError);
  c = {};
  c.max_outer_iters = 0;
  EXPECT_THROW(c.Validate(), ArgumentError);
  const oracle::Problem p = oracle::ScalarBenchmark();
  EXPECT_THROW(SolveFixedPoint(p.plant, p.cost, -1.0), ArgumentError);
}

}  // namespace
}  // namespace minlqg
