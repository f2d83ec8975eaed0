#include "minlqg/waterfill.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "minlqg/errors.h"

namespace minlqg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void CheckPair(const MatrixXd& M1, const MatrixXd& M2, const char* where) {
  if (M1.rows() != M1.cols() || M2.rows() != M2.cols() || M1.rows() != M2.rows()) {
    throw DimensionError(std::string(where) + ": M1 and M2 must be square and equal-sized");
  }
}

// Orthonormal split of M1's eigenbasis into range and kernel columns.
struct RangeSplit {
  MatrixXd range;    // n×m
  MatrixXd kernel;   // n×(n−m)
  VectorXd values;   // m positive eigenvalues, descending
};

RangeSplit SplitRange(const MatrixXd& M1, const TolerancePolicy& tol) {
  const SymEigen evd = EvdSym(M1);
  const Eigen::Index n = M1.rows();
  const double scale = n > 0 ? std::max(evd.values(0), 0.0) : 0.0;
  const double cutoff = tol.rank * scale;
  Eigen::Index m = 0;
  if (scale > 0.0) {
    while (m < n && evd.values(m) > cutoff) ++m;
  }
  RangeSplit out;
  out.range = evd.vectors.leftCols(m);
  out.kernel = evd.vectors.rightCols(n - m);
  out.values = evd.values.head(m);
  return out;
}

}  // namespace

ModeBasis ModeDecomposition(const MatrixXd& M1, const MatrixXd& M2,
                            const TolerancePolicy& tol) {
  CheckPair(M1, M2, "ModeDecomposition()");
  const Eigen::Index n = M1.rows();
  const RangeSplit split = SplitRange(M1, tol);
  const Eigen::Index m = split.range.cols();

  ModeBasis out;
  out.range_dim = static_cast<int>(m);
  out.vectors.resize(n, n);
  out.values = VectorXd::Zero(n);
  if (m > 0) {
    const MatrixXd weighted = split.range * split.values.cwiseSqrt().asDiagonal();
    const SymEigen reduced = EvdSym(weighted.transpose() * M2 * weighted);
    out.vectors.leftCols(m) = split.range * reduced.vectors;
    out.values.head(m) = reduced.values;
  }
  out.vectors.rightCols(n - m) = split.kernel;
  return out;
}

VectorXd ActiveModeCoefficients(const VectorXd& lambda) {
  VectorXd d = VectorXd::Zero(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > 1.0) d(i) = 1.0 - 1.0 / lambda(i);
  }
  return d;
}

double SdpObjective(const MatrixXd& M1, const MatrixXd& M2, const MatrixXd& X,
                    const TolerancePolicy& tol) {
  CheckPair(M1, M2, "SdpObjective()");
  if (X.rows() != M1.rows() || X.cols() != M1.cols()) {
    throw DimensionError("SdpObjective(): X has the wrong shape");
  }
  if (M1.size() == 0) return 0.0;
  const double scale = std::max(EvdSym(M1).values(0), 0.0);
  const MatrixXd slack = Symmetrize(M1 - X);
  const double ninf = -std::numeric_limits<double>::infinity();
  if (!IsNumericallyPsd(X, tol, scale) || !IsNumericallyPsd(slack, tol, scale)) {
    return ninf;
  }
  if (RankPsd(slack, tol, scale) < RankPsd(M1, tol, scale)) return ninf;
  return LogPdet(slack, tol, scale) + (M2 * X).trace();
}

WaterfillResult SolveWaterfill(const MatrixXd& M1, const MatrixXd& M2,
                               const TolerancePolicy& tol) {
  const ModeBasis basis = ModeDecomposition(M1, M2, tol);
  WaterfillResult out;
  out.V = basis.vectors;
  out.lambda = basis.values;
  out.d = ActiveModeCoefficients(out.lambda);
  out.active_count = static_cast<int>((out.d.array() > 0.0).count());
  const MatrixXd root = SqrtPsd(M1);
  out.X = ClipToPsd(root * out.V * out.d.asDiagonal() * out.V.transpose() * root, tol);
  out.objective = SdpObjective(M1, M2, out.X, tol);
  return out;
}

namespace {

// Reduced problem on range(M1): maximize log det(P1 − Y) + tr(P2 Y) with
// 0 ⪯ Y ⪯ P1, P1 diagonal and positive.
class ReducedSdp {
 public:
  ReducedSdp(VectorXd p1, MatrixXd p2) : p1_(std::move(p1)), p2_(std::move(p2)) {
    margin_ = 1e-9 * p1_.maxCoeff();
  }

  double Objective(const MatrixXd& Y) const {
    const MatrixXd slack = MatrixXd(p1_.asDiagonal()) - Y;
    Eigen::LLT<MatrixXd> llt(slack);
    if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
    const VectorXd diag = MatrixXd(llt.matrixL()).diagonal();
    return 2.0 * diag.array().log().sum() + (p2_ * Y).trace();
  }

  MatrixXd Gradient(const MatrixXd& Y) const {
    const MatrixXd slack = MatrixXd(p1_.asDiagonal()) - Y;
    const Eigen::Index m = Y.rows();
    return p2_ - slack.llt().solve(MatrixXd::Identity(m, m));
  }

  // Alternating eigenvalue clipping onto {Y ⪰ 0} and {P1 − Y ⪰ margin}.
  MatrixXd Project(MatrixXd Y) const {
    const MatrixXd P1 = p1_.asDiagonal();
    for (int round = 0; round < 100; ++round) {
      bool clean = true;
      SymEigen e = EvdSym(Y);
      if (e.values.minCoeff() < 0.0) {
        clean = false;
        Y = e.vectors * e.values.cwiseMax(0.0).asDiagonal() * e.vectors.transpose();
      }
      e = EvdSym(P1 - Y);
      if (e.values.minCoeff() < margin_) {
        clean = false;
        Y = P1 - e.vectors * e.values.cwiseMax(margin_).asDiagonal() *
                     e.vectors.transpose();
      }
      Y = Symmetrize(Y);
      if (clean) break;
    }
    return Y;
  }

  MatrixXd RandomStart(std::mt19937_64& rng) const {
    const Eigen::Index m = p1_.size();
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    MatrixXd G(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) G(i, j) = normal(rng);
    }
    const MatrixXd Qm = Eigen::HouseholderQR<MatrixXd>(G).householderQ();
    VectorXd u(m);
    for (Eigen::Index i = 0; i < m; ++i) u(i) = unit(rng);
    const VectorXd root = p1_.cwiseSqrt();
    return Symmetrize(root.asDiagonal() * Qm * u.asDiagonal() * Qm.transpose() *
                      root.asDiagonal());
  }

 private:
  VectorXd p1_;
  MatrixXd p2_;
  double margin_ = 0.0;
};

}  // namespace

BruteForceResult BruteForceSdp(const MatrixXd& M1, const MatrixXd& M2,
                               const BruteForceOptions& options,
                               const TolerancePolicy& tol) {
  CheckPair(M1, M2, "BruteForceSdp()");
  const RangeSplit split = SplitRange(M1, tol);
  const Eigen::Index m = split.range.cols();
  BruteForceResult best;
  best.X = MatrixXd::Zero(M1.rows(), M1.cols());
  if (m == 0) {
    best.objective = SdpObjective(M1, M2, best.X, tol);
    return best;
  }
  const ReducedSdp sdp(split.values,
                       Symmetrize(split.range.transpose() * M2 * split.range));

  double best_reduced = -std::numeric_limits<double>::infinity();
  MatrixXd best_y;
  for (int r = 0; r < std::max(options.restarts, 1); ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                      static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    MatrixXd Y = r == 0 ? MatrixXd(0.5 * MatrixXd(split.values.asDiagonal()))
                        : sdp.RandomStart(rng);
    double f = sdp.Objective(Y);
    double step = options.initial_step;
    int stall = 0;
    for (int s = 0; s < options.steps; ++s) {
      const MatrixXd trial = sdp.Project(Y + step * sdp.Gradient(Y));
      const double ft = sdp.Objective(trial);
      if (ft > f) {
        stall = (ft - f <= 1e-15 * (1.0 + std::abs(f))) ? stall + 1 : 0;
        Y = trial;
        f = ft;
        step *= 1.25;
        if (stall >= 20) break;
      } else {
        step *= 0.5;
        if (step < 1e-16) break;
      }
    }
    if (f > best_reduced) {
      best_reduced = f;
      best_y = Y;
    }
  }
  best.X = Symmetrize(split.range * best_y * split.range.transpose());
  best.objective = SdpObjective(M1, M2, best.X, tol);
  return best;
}

}  // namespace minlqg
