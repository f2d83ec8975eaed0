#include "minlqg/plant_model.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "minlqg/errors.h"

namespace minlqg {

using Eigen::MatrixXd;

namespace {

std::string Shape(const MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void CheckShape(const MatrixXd& m, Eigen::Index rows, Eigen::Index cols,
                const char* name, std::vector<std::string>* errors) {
  if (m.rows() != rows || m.cols() != cols) {
    errors->push_back(std::string("dimension: ") + name + " is " + Shape(m) +
                      ", expected " + std::to_string(rows) + "x" +
                      std::to_string(cols));
  }
}

void CheckPsd(const MatrixXd& m, const char* name, const TolerancePolicy& tol,
              std::vector<std::string>* errors) {
  if (!m.allFinite()) {
    errors->push_back(std::string("psd: ") + name + " has non-finite entries");
    return;
  }
  if (RelativeAsymmetry(m) > tol.sym) {
    errors->push_back(std::string("psd: ") + name + " is not symmetric");
    return;
  }
  if (!IsNumericallyPsd(m, tol)) {
    errors->push_back(std::string("psd: ") + name +
                      " is not positive semidefinite");
  }
}

}  // namespace

double SpectralRadius(const MatrixXd& A) {
  if (A.size() == 0) return 0.0;
  Eigen::EigenSolver<MatrixXd> solver(A, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("SpectralRadius(): eigensolver did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

ValidationReport Validate(const PlantSpec& plant, const CostSpec& cost,
                          const TolerancePolicy& tol) {
  tol.Validate();
  ValidationReport report;
  auto& errors = report.errors;
  const Eigen::Index n = plant.A.rows();
  const Eigen::Index k = plant.C.rows();
  const Eigen::Index l = plant.B.cols();
  if (n < 1 || k < 1 || l < 1) {
    errors.push_back("dimension: n, k and l must all be at least 1");
    return report;
  }
  CheckShape(plant.A, n, n, "A", &errors);
  CheckShape(plant.B, n, l, "B", &errors);
  CheckShape(plant.C, k, n, "C", &errors);
  CheckShape(plant.process_noise, n, n, "process_noise", &errors);
  CheckShape(plant.observation_noise, k, k, "observation_noise", &errors);
  CheckShape(cost.Q, n, n, "Q", &errors);
  CheckShape(cost.R, l, l, "R", &errors);
  if (!errors.empty()) return report;

  for (const MatrixXd* m : {&plant.A, &plant.B, &plant.C}) {
    if (!m->allFinite()) {
      errors.push_back("dimension: plant matrix has non-finite entries");
      return report;
    }
  }
  CheckPsd(plant.process_noise, "process_noise", tol, &errors);
  CheckPsd(plant.observation_noise, "observation_noise", tol, &errors);
  CheckPsd(cost.Q, "Q", tol, &errors);
  CheckPsd(cost.R, "R", tol, &errors);

  report.spectral_radius = SpectralRadius(plant.A);
  if (!(report.spectral_radius < 1.0)) {
    std::ostringstream msg;
    msg << "unstable plant unsupported: spectral radius of A is "
        << report.spectral_radius;
    errors.push_back(msg.str());
  }
  return report;
}

void ValidateOrThrow(const PlantSpec& plant, const CostSpec& cost,
                     const TolerancePolicy& tol) {
  const ValidationReport report = Validate(plant, cost, tol);
  if (report.ok()) return;
  const std::string& first = report.errors.front();
  if (first.rfind("dimension:", 0) == 0) throw DimensionError(first);
  if (first.rfind("psd:", 0) == 0) throw NotPsdError(first);
  throw UnstablePlantError(first);
}

MatrixXd SolveStein(const MatrixXd& F, const MatrixXd& G,
                    const TolerancePolicy& tol) {
  const Eigen::Index n = F.rows();
  if (F.cols() != n || G.rows() != n || G.cols() != n) {
    throw DimensionError("SolveStein(): F is " + Shape(F) + ", G is " + Shape(G));
  }
  // Smith doubling: X_{j+1} = X_j + F_j X_j F_jᵀ, F_{j+1} = F_j², so that X_j
  // sums the first 2^j terms of Σ F^i G (F^i)ᵀ.
  MatrixXd X = Symmetrize(G);
  MatrixXd Fj = F;
  const int max_iters = 100 * static_cast<int>(std::max<Eigen::Index>(n, 1));
  bool settled = false;
  for (int it = 0; it < max_iters; ++it) {
    const MatrixXd increment = Fj * X * Fj.transpose();
    X += increment;
    if (!X.allFinite()) {
      throw NumericalError("SolveStein(): iteration diverged (is rho(F) < 1?)");
    }
    Fj = Fj * Fj;
    const double xnorm = X.norm();
    if (increment.norm() <= 1e-17 * xnorm || xnorm == 0.0 ||
        Fj.norm() < 1e-150) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    throw NumericalError("SolveStein(): no convergence within " +
                         std::to_string(max_iters) + " doubling steps");
  }
  X = Symmetrize(X);
  const MatrixXd rhs = F * X * F.transpose() + G;
  const double residual = RelativeResidual(X, rhs, G.norm());
  if (residual > tol.res) {
    throw NumericalError("SolveStein(): residual " + std::to_string(residual) +
                         " exceeds tolerance");
  }
  return X;
}

MatrixXd UncontrolledLyapunov(const PlantSpec& plant, const TolerancePolicy& tol) {
  return SolveStein(plant.A, plant.process_noise, tol);
}

MatrixXd DualLyapunov(const PlantSpec& plant, const CostSpec& cost,
                      const TolerancePolicy& tol) {
  return SolveStein(plant.A.transpose(), cost.Q, tol);
}

MatrixXd ClosedLoopStateCov(const PlantSpec& plant, const MatrixXd& feedback_gain,
                            const MatrixXd& control_estimate_cov,
                            const MatrixXd& state_cov, const TolerancePolicy& tol) {
  const Eigen::Index n = plant.state_dim();
  if (feedback_gain.rows() != plant.control_dim() || feedback_gain.cols() != n ||
      control_estimate_cov.rows() != n || control_estimate_cov.cols() != n ||
      state_cov.rows() != n || state_cov.cols() != n) {
    throw DimensionError("ClosedLoopStateCov(): inconsistent dimensions");
  }
  const double scale = std::max(EvdSym(state_cov).values(0), 0.0);
  MatrixXd remainder;
  try {
    remainder = ClipToPsd(state_cov - control_estimate_cov, tol, scale);
  } catch (const NotPsdError&) {
    throw NumericalError(
        "ClosedLoopStateCov(): inconsistent estimator covariance "
        "(state_cov - control_estimate_cov is not PSD)");
  }
  const MatrixXd closed = plant.A + plant.B * feedback_gain;
  const MatrixXd next = closed * control_estimate_cov * closed.transpose() +
                        plant.A * remainder * plant.A.transpose() +
                        plant.process_noise;
  return ClipToPsd(next, tol);
}

ObservationStats ObservationStatistics(const PlantSpec& plant,
                                       const MatrixXd& state_cov,
                                       const TolerancePolicy& tol) {
  ObservationStats out;
  out.obs_cov = Symmetrize(plant.C * state_cov * plant.C.transpose() +
                           plant.observation_noise);
  out.gain = state_cov * plant.C.transpose() * PinvPsd(out.obs_cov, tol);
  out.estimate_cov = Symmetrize(out.gain * out.obs_cov * out.gain.transpose());
  const double scale = std::max(EvdSym(state_cov).values(0), 0.0);
  try {
    out.residual_cov = ClipToPsd(state_cov - out.estimate_cov, tol, scale);
  } catch (const NotPsdError& e) {
    throw NumericalError(
        std::string("ObservationStatistics(): residual covariance is not "
                    "PSD (internal consistency): ") +
        e.what());
  }
  return out;
}

double ExpectedCostRate(const CostSpec& cost, const MatrixXd& state_cov,
                        const MatrixXd& control_cov) {
  return 0.5 * ((cost.Q * state_cov).trace() + (cost.R * control_cov).trace());
}

}  // namespace minlqg
