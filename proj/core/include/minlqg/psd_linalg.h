#pragma once

// Symmetric / positive-semidefinite matrix primitives shared by every other
// module. All rank decisions go through one relative cutoff:
//
//   eigenvalue λ is "retained"  <=>  λ > rank_tol * scale,
//
// where scale defaults to max(λmax, 0) of the matrix itself. Callers that
// compare a matrix against a larger reference (e.g. a conditional covariance
// against its marginal) pass the reference scale explicitly so that
// round-off residue is not promoted to a genuine eigen-direction.

#include <optional>

#include <Eigen/Dense>

namespace minlqg {

struct TolerancePolicy {
  /// Relative eigenvalue cutoff for rank, pinv and pdet.
  double rank = 1e-10;
  /// Relative asymmetry accepted on input matrices.
  double sym = 1e-12;
  /// Residual tolerance for equation checks.
  double res = 1e-8;

  /// Throws ArgumentError unless every field is strictly positive.
  void Validate() const;
};

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
struct SymEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// (m + mᵀ) / 2.
Eigen::MatrixXd Symmetrize(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// ‖m − mᵀ‖_F / ‖m‖_F, zero for the zero matrix.
double RelativeAsymmetry(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Symmetric EVD with m = V diag(λ) Vᵀ, λ sorted descending. The input is
/// symmetrized first. Throws NumericalError if the eigensolver fails.
SymEigen EvdSym(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Absolute cutoff tol.rank * scale, scale defaulting to max(λmax, 0).
double RankCutoff(const Eigen::VectorXd& eigenvalues, const TolerancePolicy& tol,
                  std::optional<double> scale = std::nullopt);

/// Moore-Penrose pseudoinverse of a PSD matrix through its EVD.
Eigen::MatrixXd PinvPsd(const Eigen::Ref<const Eigen::MatrixXd>& m,
                        const TolerancePolicy& tol = {},
                        std::optional<double> scale = std::nullopt);

/// Pseudodeterminant: product of retained eigenvalues (1 for rank 0).
double Pdet(const Eigen::Ref<const Eigen::MatrixXd>& m,
            const TolerancePolicy& tol = {},
            std::optional<double> scale = std::nullopt);

/// log Pdet, summed in log space.
double LogPdet(const Eigen::Ref<const Eigen::MatrixXd>& m,
               const TolerancePolicy& tol = {},
               std::optional<double> scale = std::nullopt);

/// Symmetric PSD square root; negative round-off eigenvalues are clipped.
Eigen::MatrixXd SqrtPsd(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Square root together with its pseudoinverse m^{†/2}, sharing one EVD.
struct PsdRoot {
  Eigen::MatrixXd root;
  Eigen::MatrixXd pinv_root;
  int rank = 0;
};
PsdRoot SqrtPsdWithPinv(const Eigen::Ref<const Eigen::MatrixXd>& m,
                        const TolerancePolicy& tol = {},
                        std::optional<double> scale = std::nullopt);

/// Number of retained eigenvalues; the zero matrix has rank 0.
int RankPsd(const Eigen::Ref<const Eigen::MatrixXd>& m,
            const TolerancePolicy& tol = {},
            std::optional<double> scale = std::nullopt);

/// True when λmin >= -tol.rank * scale.
bool IsNumericallyPsd(const Eigen::Ref<const Eigen::MatrixXd>& m,
                      const TolerancePolicy& tol = {},
                      std::optional<double> scale = std::nullopt);

/// Symmetrizes and zeroes eigenvalues in [-tol.rank * scale, 0). Throws
/// NotPsdError when an eigenvalue is more negative than that.
Eigen::MatrixXd ClipToPsd(const Eigen::Ref<const Eigen::MatrixXd>& m,
                          const TolerancePolicy& tol = {},
                          std::optional<double> scale = std::nullopt);

/// ‖lhs − rhs‖_F / max(‖lhs‖_F, ‖rhs‖_F, floor); 0 when the denominator is 0.
/// `floor` lets an equation with cancelling terms be measured against the
/// size of those terms instead of the (small) result.
double RelativeResidual(const Eigen::Ref<const Eigen::MatrixXd>& lhs,
                        const Eigen::Ref<const Eigen::MatrixXd>& rhs,
                        double floor = 0.0);

}  // namespace minlqg
