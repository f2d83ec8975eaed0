#include "minlqg/waterfill.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles/random_instances.h"

namespace minlqg {
namespace {

using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::VectorXd;

MatrixXd Diag2(double a, double b) { return Vector2d(a, b).asDiagonal(); }

TEST(ActiveModeCoefficients, Threshold) {
  const VectorXd d = ActiveModeCoefficients(Eigen::Vector4d(4.0, 1.0, 0.5, 0.0));
  EXPECT_DOUBLE_EQ(d(0), 0.75);
  EXPECT_EQ(d(1), 0.0);
  EXPECT_EQ(d(2), 0.0);
  EXPECT_EQ(d(3), 0.0);
}

TEST(SolveWaterfill, Diagonal) {
  const WaterfillResult r = SolveWaterfill(MatrixXd::Identity(2, 2), Diag2(2.0, 0.5));
  EXPECT_NEAR(r.lambda(0), 2.0, 1e-14);
  EXPECT_NEAR(r.lambda(1), 0.5, 1e-14);
  EXPECT_NEAR(r.d(0), 0.5, 1e-14);
  EXPECT_EQ(r.d(1), 0.0);
  EXPECT_LT((r.X - Diag2(0.5, 0.0)).norm(), 1e-14);
  EXPECT_EQ(r.active_count, 1);
  EXPECT_NEAR(r.objective, std::log(0.5) + 1.0, 1e-14);
}

TEST(SolveWaterfill, NoValueNoMass) {
  std::mt19937_64 rng(1);
  const MatrixXd M1 = oracle::RandomPsd(rng, 3, 3);
  const WaterfillResult r = SolveWaterfill(M1, MatrixXd::Zero(3, 3));
  EXPECT_TRUE(r.X.isZero(0.0));
  EXPECT_TRUE(r.d.isZero(0.0));
  EXPECT_EQ(r.active_count, 0);
}

TEST(SolveWaterfill, FeasibleAndSupportedOnRange) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 1 + trial % 4;
    const oracle::PsdPair pr = oracle::RandomPsdPair(rng, n, trial % 3 == 2);
    const WaterfillResult r = SolveWaterfill(pr.M1, pr.M2);
    const double scale = pr.M1.norm();
    EXPECT_GE(EvdSym(r.X).values.minCoeff(), -1e-12 * scale);
    EXPECT_GE(EvdSym(pr.M1 - r.X).values.minCoeff(), -1e-12 * scale);
    const MatrixXd proj = pr.M1 * PinvPsd(pr.M1);
    EXPECT_LE((proj * r.X * proj - r.X).norm(), 1e-10 * scale);
    EXPECT_NEAR(r.objective, SdpObjective(pr.M1, pr.M2, r.X), 1e-10 * (1 + std::abs(r.objective)));
  }
}

TEST(SolveWaterfill, BeatsBruteForceOnRandomPairs) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const oracle::PsdPair pr = oracle::RandomPsdPair(rng, 3, false);
    const WaterfillResult cf = SolveWaterfill(pr.M1, pr.M2);
    const BruteForceResult bf = BruteForceSdp(pr.M1, pr.M2);
    EXPECT_GE(cf.objective, bf.objective - 1e-6);
    EXPECT_NEAR(cf.objective, bf.objective, 1e-4);
  }
}

TEST(BruteForceSdp, DiagonalAndSingular) {
  const MatrixXd M2 = Diag2(2.0, 0.5);
  const BruteForceResult bf = BruteForceSdp(MatrixXd::Identity(2, 2), M2);
  EXPECT_NEAR(bf.objective, SolveWaterfill(MatrixXd::Identity(2, 2), M2).objective, 1e-4);

  const BruteForceResult zero = BruteForceSdp(MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2));
  EXPECT_LT(zero.X.norm(), 1e-3);

  const MatrixXd M1 = Diag2(1.0, 0.0);
  const MatrixXd M2s = Diag2(3.0, 7.0);
  const BruteForceResult sing = BruteForceSdp(M1, M2s);
  const WaterfillResult cf = SolveWaterfill(M1, M2s);
  EXPECT_NEAR(sing.objective, cf.objective, 1e-4);
  EXPECT_LT(std::abs(sing.X(1, 1)) + std::abs(sing.X(0, 1)), 1e-8);
  EXPECT_NEAR(cf.X(0, 0), 1.0 - 1.0 / 3.0, 1e-14);
}

TEST(SdpObjective, InfeasibleIsMinusInfinity) {
  const MatrixXd M1 = MatrixXd::Identity(2, 2);
  EXPECT_TRUE(std::isinf(SdpObjective(M1, M1, 1.5 * M1)));
  EXPECT_TRUE(std::isinf(SdpObjective(M1, M1, Diag2(1.0, 0.0))));
  EXPECT_NEAR(SdpObjective(M1, M1, MatrixXd::Zero(2, 2)), 0.0, 1e-15);
}

TEST(ModeDecomposition, CompletesKernel) {
  const ModeBasis b = ModeDecomposition(Diag2(4.0, 0.0), Diag2(2.0, 9.0));
  EXPECT_EQ(b.range_dim, 1);
  EXPECT_NEAR(b.values(0), 8.0, 1e-13);
  EXPECT_EQ(b.values(1), 0.0);
  EXPECT_LT((b.vectors.transpose() * b.vectors - MatrixXd::Identity(2, 2)).norm(), 1e-14);
}

}  // namespace
}  // namespace minlqg
