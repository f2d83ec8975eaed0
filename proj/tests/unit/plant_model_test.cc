#include "minlqg/plant_model.h"

#include <random>

#include <gtest/gtest.h>

#include "minlqg/errors.h"
#include "oracles/frozen_values.h"
#include "oracles/random_instances.h"

namespace minlqg {
namespace {

using Eigen::MatrixXd;

MatrixXd Scalar(double v) { return MatrixXd::Constant(1, 1, v); }

TEST(Validate, ScalarBenchmarkIsValid) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  const ValidationReport r = Validate(p.plant, p.cost);
  EXPECT_TRUE(r.ok());
  EXPECT_NEAR(r.spectral_radius, 0.9, 1e-14);
  EXPECT_NO_THROW(ValidateOrThrow(p.plant, p.cost));
}

TEST(Validate, UnstablePlant) {
  oracle::Problem p = oracle::ScalarBenchmark();
  p.plant.A = Scalar(1.1);
  EXPECT_FALSE(Validate(p.plant, p.cost).ok());
  EXPECT_THROW(ValidateOrThrow(p.plant, p.cost), UnstablePlantError);
}

TEST(Validate, WrongShapeOfB) {
  oracle::Problem p = oracle::ScalarBenchmark();
  p.plant.B = MatrixXd::Ones(2, 1);
  EXPECT_THROW(ValidateOrThrow(p.plant, p.cost), DimensionError);
}

TEST(Validate, IndefiniteNoiseAndAsymmetricQ) {
  oracle::Problem p = oracle::ScalarBenchmark();
  p.plant.process_noise = Scalar(-1.0);
  EXPECT_THROW(ValidateOrThrow(p.plant, p.cost), NotPsdError);

  std::mt19937_64 rng(1);
  oracle::Problem two = oracle::FullObservationProblem(rng, 2);
  two.cost.Q(0, 1) += 0.5;
  const ValidationReport r = Validate(two.plant, two.cost);
  EXPECT_FALSE(r.ok());
}

TEST(Validate, ReportsEveryProblem) {
  oracle::Problem p = oracle::ScalarBenchmark();
  p.plant.A = Scalar(1.5);
  p.cost.R = Scalar(-2.0);
  EXPECT_GE(Validate(p.plant, p.cost).errors.size(), 2u);
}

TEST(UncontrolledLyapunov, Scalar) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  EXPECT_NEAR(UncontrolledLyapunov(p.plant)(0, 0), oracle::frozen::kZeroStateVar, 1e-12);
}

TEST(UncontrolledLyapunov, ZeroDynamicsAndDiagonal) {
  PlantSpec plant;
  plant.A = MatrixXd::Zero(2, 2);
  plant.B = MatrixXd::Identity(2, 1);
  plant.C = MatrixXd::Identity(2, 2);
  plant.process_noise = (MatrixXd(2, 2) << 2, 1, 1, 3).finished();
  plant.observation_noise = MatrixXd::Zero(2, 2);
  EXPECT_TRUE(UncontrolledLyapunov(plant).isApprox(plant.process_noise, 1e-14));

  plant.A = (MatrixXd(2, 2) << 0.5, 0, 0, 0.2).finished();
  plant.process_noise = MatrixXd::Identity(2, 2);
  const MatrixXd expected = (MatrixXd(2, 2) << 1 / 0.75, 0, 0, 1 / 0.96).finished();
  EXPECT_LT((UncontrolledLyapunov(plant) - expected).norm(), 1e-12);
}

TEST(DualLyapunov, Examples) {
  oracle::Problem p = oracle::ScalarBenchmark();
  EXPECT_NEAR(DualLyapunov(p.plant, p.cost)(0, 0), oracle::frozen::kZeroCostToGo, 1e-12);
  p.cost.Q = Scalar(0.0);
  EXPECT_EQ(DualLyapunov(p.plant, p.cost)(0, 0), 0.0);
  p.cost.Q = Scalar(2.0);
  p.plant.A = Scalar(0.0);
  EXPECT_NEAR(DualLyapunov(p.plant, p.cost)(0, 0), 2.0, 1e-15);
}

TEST(SolveStein, RandomResidual) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const oracle::Problem p = oracle::RandomStableProblem(rng);
    const MatrixXd G = oracle::RandomPsd(rng, p.plant.state_dim(), 2) -
                       oracle::RandomPsd(rng, p.plant.state_dim(), 1);
    const MatrixXd X = SolveStein(p.plant.A, G);
    EXPECT_LT(RelativeResidual(X, p.plant.A * X * p.plant.A.transpose() + G, G.norm()), 1e-10);
  }
}

TEST(ClosedLoopStateCov, ScalarArithmetic) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  const MatrixXd next = ClosedLoopStateCov(p.plant, Scalar(-0.5), Scalar(2.0), Scalar(4.0));
  EXPECT_NEAR(next(0, 0), 2.94, 1e-14);
}

TEST(ClosedLoopStateCov, ReducesToOpenLoop) {
  std::mt19937_64 rng(4);
  const oracle::Problem p = oracle::FullObservationProblem(rng, 3);
  const MatrixXd prev = oracle::RandomPsd(rng, 3, 4);
  const MatrixXd open = p.plant.A * prev * p.plant.A.transpose() + p.plant.process_noise;
  const MatrixXd L = MatrixXd::Random(p.plant.control_dim(), 3);
  EXPECT_LT(RelativeResidual(ClosedLoopStateCov(p.plant, L, MatrixXd::Zero(3, 3), prev), open),
            1e-14);
  const MatrixXd zero_gain = MatrixXd::Zero(p.plant.control_dim(), 3);
  EXPECT_LT(RelativeResidual(ClosedLoopStateCov(p.plant, zero_gain, 0.5 * prev, prev), open),
            1e-14);
}

TEST(ClosedLoopStateCov, RejectsEstimateLargerThanState) {
  const oracle::Problem p = oracle::ScalarBenchmark();
  EXPECT_THROW(ClosedLoopStateCov(p.plant, Scalar(-0.5), Scalar(5.0), Scalar(4.0)),
               NumericalError);
}

TEST(ObservationStatistics, FullAndNoObservation) {
  std::mt19937_64 rng(8);
  const oracle::Problem p = oracle::FullObservationProblem(rng, 3);
  const MatrixXd sx = oracle::RandomPsd(rng, 3, 5);
  const ObservationStats full = ObservationStatistics(p.plant, sx);
  EXPECT_LT((full.gain - MatrixXd::Identity(3, 3)).norm(), 1e-9);
  EXPECT_LT(RelativeResidual(full.estimate_cov, sx), 1e-12);
  EXPECT_LT(full.residual_cov.norm(), 1e-10 * sx.norm());

  PlantSpec blind = p.plant;
  blind.C = MatrixXd::Zero(2, 3);
  blind.observation_noise = MatrixXd::Identity(2, 2);
  const ObservationStats none = ObservationStatistics(blind, sx);
  EXPECT_TRUE(none.obs_cov.isApprox(blind.observation_noise));
  EXPECT_TRUE(none.gain.isZero(0.0));
  EXPECT_TRUE(none.estimate_cov.isZero(0.0));
  EXPECT_TRUE(none.residual_cov.isApprox(sx));
}

TEST(ObservationStatistics, NoisyScalar) {
  oracle::Problem p = oracle::ScalarBenchmark();
  p.plant.observation_noise = Scalar(1.0);
  const double sx = 5.263158;
  const ObservationStats s = ObservationStatistics(p.plant, Scalar(sx));
  EXPECT_NEAR(s.obs_cov(0, 0), 6.263158, 1e-12);
  EXPECT_NEAR(s.gain(0, 0), sx / 6.263158, 1e-12);
  EXPECT_NEAR(s.gain(0, 0), 0.840336, 1e-6);
  EXPECT_NEAR(s.estimate_cov(0, 0), sx * sx / 6.263158, 1e-12);
  EXPECT_NEAR(s.estimate_cov(0, 0), 4.422822, 1e-6);
}

TEST(ExpectedCostRate, Examples) {
  const CostSpec zero{Scalar(0.0), Scalar(0.0)};
  EXPECT_EQ(ExpectedCostRate(zero, Scalar(3.0), Scalar(4.0)), 0.0);
  const CostSpec unit{Scalar(1.0), Scalar(1.0)};
  EXPECT_NEAR(ExpectedCostRate(unit, Scalar(5.263158), Scalar(0.0)), 2.631579, 1e-12);
  EXPECT_DOUBLE_EQ(ExpectedCostRate(unit, Scalar(2.0), Scalar(3.0)), 2.5);
}

}  // namespace
}  // namespace minlqg
