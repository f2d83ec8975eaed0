#include "minlqg/psd_linalg.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "minlqg/errors.h"

namespace minlqg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void TolerancePolicy::Validate() const {
  if (!(rank > 0) || !(sym > 0) || !(res > 0)) {
    throw ArgumentError("TolerancePolicy: all tolerances must be positive");
  }
}

MatrixXd Symmetrize(const Eigen::Ref<const MatrixXd>& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("Symmetrize(): matrix is " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()) + ", not square");
  }
  return 0.5 * (m + m.transpose());
}

double RelativeAsymmetry(const Eigen::Ref<const MatrixXd>& m) {
  const double norm = m.norm();
  if (norm == 0.0) return 0.0;
  return (m - m.transpose()).norm() / norm;
}

SymEigen EvdSym(const Eigen::Ref<const MatrixXd>& m) {
  const MatrixXd sym = Symmetrize(m);
  SymEigen out;
  if (sym.rows() == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  if (!sym.allFinite()) {
    throw NumericalError("EvdSym(): matrix has non-finite entries");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("EvdSym(): eigensolver did not converge");
  }
  // Eigen returns ascending order; flip to descending.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

double RankCutoff(const VectorXd& eigenvalues, const TolerancePolicy& tol,
                  std::optional<double> scale) {
  double s = 0.0;
  if (scale.has_value()) {
    s = std::max(*scale, 0.0);
  } else if (eigenvalues.size() > 0) {
    s = std::max(eigenvalues.maxCoeff(), 0.0);
  }
  return tol.rank * s;
}

namespace {

// Indices of retained eigenvalues. A zero (or negative) scale retains none.
std::vector<Eigen::Index> Retained(const VectorXd& values, double cutoff,
                                   bool zero_scale) {
  std::vector<Eigen::Index> keep;
  if (zero_scale) return keep;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) > cutoff) keep.push_back(i);
  }
  return keep;
}

struct Spectrum {
  SymEigen evd;
  std::vector<Eigen::Index> keep;
};

Spectrum Analyze(const Eigen::Ref<const MatrixXd>& m, const TolerancePolicy& tol,
                 std::optional<double> scale) {
  Spectrum s;
  s.evd = EvdSym(m);
  const double cutoff = RankCutoff(s.evd.values, tol, scale);
  const double ref = scale.has_value()
                         ? *scale
                         : (s.evd.values.size() ? s.evd.values.maxCoeff() : 0.0);
  s.keep = Retained(s.evd.values, cutoff, !(ref > 0.0));
  return s;
}

}  // namespace

MatrixXd PinvPsd(const Eigen::Ref<const MatrixXd>& m, const TolerancePolicy& tol,
                 std::optional<double> scale) {
  const Spectrum s = Analyze(m, tol, scale);
  MatrixXd out = MatrixXd::Zero(m.rows(), m.cols());
  for (Eigen::Index i : s.keep) {
    const auto v = s.evd.vectors.col(i);
    out.noalias() += (1.0 / s.evd.values(i)) * v * v.transpose();
  }
  return Symmetrize(out);
}

double LogPdet(const Eigen::Ref<const MatrixXd>& m, const TolerancePolicy& tol,
               std::optional<double> scale) {
  const Spectrum s = Analyze(m, tol, scale);
  double sum = 0.0;
  for (Eigen::Index i : s.keep) sum += std::log(s.evd.values(i));
  return sum;
}

double Pdet(const Eigen::Ref<const MatrixXd>& m, const TolerancePolicy& tol,
            std::optional<double> scale) {
  return std::exp(LogPdet(m, tol, scale));
}

MatrixXd SqrtPsd(const Eigen::Ref<const MatrixXd>& m) {
  const SymEigen evd = EvdSym(m);
  const VectorXd roots = evd.values.cwiseMax(0.0).cwiseSqrt();
  return Symmetrize(evd.vectors * roots.asDiagonal() * evd.vectors.transpose());
}

PsdRoot SqrtPsdWithPinv(const Eigen::Ref<const MatrixXd>& m,
                        const TolerancePolicy& tol, std::optional<double> scale) {
  const Spectrum s = Analyze(m, tol, scale);
  PsdRoot out;
  const VectorXd roots = s.evd.values.cwiseMax(0.0).cwiseSqrt();
  out.root = Symmetrize(s.evd.vectors * roots.asDiagonal() *
                        s.evd.vectors.transpose());
  out.pinv_root = MatrixXd::Zero(m.rows(), m.cols());
  for (Eigen::Index i : s.keep) {
    const auto v = s.evd.vectors.col(i);
    out.pinv_root.noalias() += (1.0 / roots(i)) * v * v.transpose();
  }
  out.pinv_root = Symmetrize(out.pinv_root);
  out.rank = static_cast<int>(s.keep.size());
  return out;
}

int RankPsd(const Eigen::Ref<const MatrixXd>& m, const TolerancePolicy& tol,
            std::optional<double> scale) {
  return static_cast<int>(Analyze(m, tol, scale).keep.size());
}

bool IsNumericallyPsd(const Eigen::Ref<const MatrixXd>& m,
                      const TolerancePolicy& tol, std::optional<double> scale) {
  if (m.size() == 0) return true;
  const SymEigen evd = EvdSym(m);
  const double cutoff = RankCutoff(evd.values, tol, scale);
  return evd.values.minCoeff() >= -cutoff;
}

MatrixXd ClipToPsd(const Eigen::Ref<const MatrixXd>& m, const TolerancePolicy& tol,
                   std::optional<double> scale) {
  if (m.size() == 0) return MatrixXd(m);
  const SymEigen evd = EvdSym(m);
  const double cutoff = RankCutoff(evd.values, tol, scale);
  if (evd.values.minCoeff() < -cutoff) {
    throw NotPsdError("ClipToPsd(): eigenvalue " +
                      std::to_string(evd.values.minCoeff()) +
                      " is below the PSD tolerance " + std::to_string(-cutoff));
  }
  if (evd.values.minCoeff() >= 0.0) return Symmetrize(m);
  const VectorXd clipped = evd.values.cwiseMax(0.0);
  return Symmetrize(evd.vectors * clipped.asDiagonal() * evd.vectors.transpose());
}

double RelativeResidual(const Eigen::Ref<const MatrixXd>& lhs,
                        const Eigen::Ref<const MatrixXd>& rhs, double floor) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
    throw DimensionError("RelativeResidual(): shape mismatch");
  }
  const double denom = std::max({lhs.norm(), rhs.norm(), floor});
  if (denom == 0.0) return 0.0;
  return (lhs - rhs).norm() / denom;
}

}  // namespace minlqg
