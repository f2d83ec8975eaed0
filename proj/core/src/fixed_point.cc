#include "minlqg/fixed_point.h"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <optional>
#include <random>

#include "minlqg/errors.h"
#include "minlqg/waterfill.h"

namespace minlqg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double TopEigenvalue(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return std::max(EvdSym(m).values(0), 0.0);
}

double Residual(const MatrixXd& lhs, const MatrixXd& rhs,
                std::initializer_list<double> terms = {}) {
  double floor = 0.0;
  for (double t : terms) floor = std::max(floor, t);
  return RelativeResidual(lhs, rhs, floor);
}

double RelativeChange(const MatrixXd& now, const MatrixXd& before) {
  const double denom = std::max(now.norm(), before.norm());
  if (denom == 0.0) return 0.0;
  return (now - before).norm() / denom;
}

bool AllFinite(const FixedPointState& s) {
  return s.state_cov.allFinite() && s.S.allFinite() && s.L.allFinite() &&
         s.N.allFinite() && s.control_estimate_cov.allFinite();
}

// Convex combination of two estimator covariances in coordinates whitened by
// Σx̂y, where feasibility is 0 ⪯ P ≺ I.
MatrixXd DampedControlCov(const MatrixXd& estimate_cov, const MatrixXd& previous,
                          const MatrixXd& fresh, double alpha,
                          const TolerancePolicy& tol) {
  const PsdRoot root = SqrtPsdWithPinv(estimate_cov, tol);
  const MatrixXd p_old = root.pinv_root * previous * root.pinv_root;
  const MatrixXd p_new = root.pinv_root * fresh * root.pinv_root;
  const SymEigen e = EvdSym((1.0 - alpha) * p_old + alpha * p_new);
  const VectorXd clipped = e.values.cwiseMax(0.0).cwiseMin(1.0 - 1e-9);
  const MatrixXd p = e.vectors * clipped.asDiagonal() * e.vectors.transpose();
  return Symmetrize(root.root * p * root.root);
}

MatrixXd InfoCurvature(const PlantSpec& plant, FixedPointState* st, double beta,
                       const TolerancePolicy& tol) {
  const MatrixXd KC = st->obs.gain * plant.C;
  if (std::isinf(beta)) return Symmetrize(KC.transpose() * st->N * KC);
  if (!(beta > 0.0)) throw ArgumentError("β must be positive");
  if (st->Z.rows() != KC.rows()) {
    st->Z = SnrMatrix(st->obs.estimate_cov, st->control_estimate_cov, tol);
  }
  return Symmetrize(KC.transpose() * st->Z * KC) / beta;
}

// One pass forward → water-fill → backward; alpha < 1 damps the Σx̂u update.
void Sweep(const PlantSpec& plant, const CostSpec& cost, FixedPointState* st,
           double beta, double alpha, const TolerancePolicy& tol) {
  const MatrixXd prev_sxu = st->control_estimate_cov;
  st->state_cov = ClosedLoopStateCov(plant, st->L, st->control_estimate_cov,
                                     st->state_cov, tol);
  st->obs = ObservationStatistics(plant, st->state_cov, tol);

  WaterfillStep(st, beta, tol);
  if (alpha < 1.0 && std::isfinite(beta)) {
    st->control_estimate_cov = DampedControlCov(
        st->obs.estimate_cov, prev_sxu, st->control_estimate_cov, alpha, tol);
    st->Z = SnrMatrix(st->obs.estimate_cov, st->control_estimate_cov, tol);
  }

  st->M = InfoCurvature(plant, st, beta, tol);
  st->S = Symmetrize(cost.Q + plant.A.transpose() * st->S * plant.A - st->M);
  GainsFromCostToGo(plant, cost, st, tol);
}

FixedPointState PerturbedStart(const FixedPointState& init, std::uint64_t seed,
                               int index, const TolerancePolicy& tol) {
  FixedPointState st = init;
  const Eigen::Index n = st.state_cov.rows();
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.0, 0.9);
  MatrixXd G(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) G(i, j) = normal(rng);
  }
  const MatrixXd Qm = Eigen::HouseholderQR<MatrixXd>(G).householderQ();
  VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = unit(rng);
  const MatrixXd root = SqrtPsd(st.obs.estimate_cov);
  st.control_estimate_cov =
      Symmetrize(root * Qm * u.asDiagonal() * Qm.transpose() * root);
  st.Z = SnrMatrix(st.obs.estimate_cov, st.control_estimate_cov, tol);
  return st;
}

struct Attempt {
  FixedPointState state;
  int iterations = 0;
  bool converged = false;
  bool oscillating = false;
  bool failed = false;
  std::string message;
};

Attempt Iterate(const PlantSpec& plant, const CostSpec& cost, double beta,
                const FixedPointState& init, double alpha, const SolverConfig& config) {
  Attempt out;
  out.state = init;
  out.state.beta = beta;
  FixedPointState& st = out.state;
  double previous_change = kInf;
  int increases = 0;
  for (int it = 1; it <= config.max_outer_iters; ++it) {
    out.iterations = it;
    const MatrixXd sx = st.state_cov;
    const MatrixXd s = st.S;
    const MatrixXd sxu = st.control_estimate_cov;
    try {
      Sweep(plant, cost, &st, beta, alpha, config.tol);
    } catch (const NumericalError& e) {
      out.failed = true;
      out.message = e.what();
      return out;
    }
    if (!AllFinite(st)) {
      out.failed = true;
      out.message = "iteration produced non-finite values";
      return out;
    }
    const double change =
        std::max({RelativeChange(st.state_cov, sx), RelativeChange(st.S, s),
                  RelativeChange(st.control_estimate_cov, sxu)});
    if (change > config.fixed_point_tol && change > previous_change) {
      if (++increases >= 10) {
        out.oscillating = true;
        out.message = "relative change grew for 10 consecutive iterations";
        return out;
      }
    } else {
      increases = 0;
    }
    previous_change = change;
    const double accept = ResidualTolerance(st, config.tol);
    if (change < std::max(config.fixed_point_tol, accept - config.tol.res)) {
      const auto res = Residuals(plant, cost, st, config.tol);
      double worst = 0.0;
      for (const auto& [name, value] : res) worst = std::max(worst, value);
      if (worst < accept) {
        out.converged = true;
        return out;
      }
    }
  }
  out.message = "iteration cap reached";
  return out;
}

// Packs the independent blocks (Σx, S, Σx̂u); everything else in the state
// is a function of them.
VectorXd Pack(const FixedPointState& st) {
  const Eigen::Index n = st.state_cov.rows();
  VectorXd p(3 * n * (n + 1) / 2);
  Eigen::Index at = 0;
  for (const MatrixXd* m : {&st.state_cov, &st.S, &st.control_estimate_cov}) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) p(at++) = (*m)(i, j);
    }
  }
  return p;
}

FixedPointState Unpack(const PlantSpec& plant, const CostSpec& cost,
                       const VectorXd& p, double beta, const TolerancePolicy& tol) {
  const Eigen::Index n = plant.state_dim();
  FixedPointState st;
  st.beta = beta;
  Eigen::Index at = 0;
  for (MatrixXd* m : {&st.state_cov, &st.S, &st.control_estimate_cov}) {
    m->resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i <= j; ++i) {
        (*m)(i, j) = p(at);
        (*m)(j, i) = p(at);
        ++at;
      }
    }
  }
  st.obs = ObservationStatistics(plant, st.state_cov, tol);
  GainsFromCostToGo(plant, cost, &st, tol);
  st.Z = SnrMatrix(st.obs.estimate_cov, st.control_estimate_cov, tol);
  st.M = MatrixXd::Zero(n, n);
  return st;
}

// Fallback for fixed points that the plain sweep cannot reach (Jacobian of
// the sweep map with an eigenvalue outside the damping region): Newton on
// sweep(p) − p with a forward-difference Jacobian and backtracking.
Attempt NewtonSolve(const PlantSpec& plant, const CostSpec& cost, double beta,
                    const FixedPointState& start, const SolverConfig& config) {
  Attempt out;
  out.state = start;
  auto gap = [&](const VectorXd& p, FixedPointState* swept) -> std::optional<VectorXd> {
    try {
      FixedPointState st = Unpack(plant, cost, p, beta, config.tol);
      Sweep(plant, cost, &st, beta, 1.0, config.tol);
      if (!AllFinite(st)) return std::nullopt;
      VectorXd g = Pack(st) - p;
      if (swept != nullptr) *swept = std::move(st);
      return g;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  VectorXd p = Pack(start);
  FixedPointState swept;
  auto g = gap(p, &swept);
  if (!g) {
    out.failed = true;
    out.message = "Newton fallback: start point is infeasible";
    return out;
  }
  const Eigen::Index m = p.size();
  for (int it = 1; it <= 100; ++it) {
    out.iterations = it;
    const double scale = std::max(p.norm(), 1e-300);
    const double floor = ResidualTolerance(swept, config.tol) - config.tol.res;
    if (g->norm() <= std::max(config.fixed_point_tol, floor) * scale) {
      const auto res = Residuals(plant, cost, swept, config.tol);
      double worst = 0.0;
      for (const auto& [name, value] : res) worst = std::max(worst, value);
      out.state = swept;
      out.converged = worst < ResidualTolerance(swept, config.tol);
      if (out.converged) return out;
    }
    MatrixXd J(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      const double h = 1e-7 * std::max(std::abs(p(j)), 1e-3 * scale / std::sqrt(double(m)));
      VectorXd q = p;
      q(j) += h;
      auto gj = gap(q, nullptr);
      if (!gj) {
        q(j) = p(j) - h;
        gj = gap(q, nullptr);
        if (!gj) {
          out.failed = true;
          out.message = "Newton fallback: Jacobian probe left the feasible set";
          return out;
        }
        J.col(j) = (*g - *gj) / h;
      } else {
        J.col(j) = (*gj - *g) / h;
      }
    }
    const VectorXd step = J.colPivHouseholderQr().solve(-*g);
    bool accepted = false;
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      const VectorXd trial = p + t * step;
      FixedPointState trial_state;
      auto gt = gap(trial, &trial_state);
      if (gt && gt->norm() < (1.0 - 1e-4 * t) * g->norm()) {
        p = trial;
        g = gt;
        swept = std::move(trial_state);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.state = swept;
      out.message = "Newton fallback: line search failed";
      return out;
    }
  }
  out.state = swept;
  out.message = "Newton fallback: iteration cap reached";
  return out;
}

SolveReport SolveOnce(const PlantSpec& plant, const CostSpec& cost, double beta,
                      const FixedPointState& init, const SolverConfig& config) {
  double alpha = config.damping;
  constexpr double kMinDamping = 1.0 / 1024.0;
  Attempt attempt;
  while (true) {
    attempt = Iterate(plant, cost, beta, init, alpha, config);
    if (attempt.converged) break;
    if (!attempt.oscillating && !attempt.failed) break;
    alpha *= 0.5;
    if (alpha < kMinDamping) {
      attempt.message += " (damping underflow)";
      break;
    }
  }
  if (!attempt.converged) {
    const FixedPointState* starts[] = {&init, &attempt.state};
    for (const FixedPointState* from : starts) {
      if (from->empty() || from->S.size() == 0) continue;
      Attempt newton = NewtonSolve(plant, cost, beta, *from, config);
      if (newton.converged) {
        newton.iterations += attempt.iterations;
        newton.message = "converged (Newton fallback)";
        attempt = std::move(newton);
        break;
      }
    }
  }
  SolveReport report;
  if (attempt.failed) {
    report.state = attempt.state;
    report.state.beta = beta;
    report.iterations = attempt.iterations;
    report.damping = alpha;
    report.message = attempt.message;
    // The state may be inconsistent; skip anything that could throw again.
    try {
      SolveReport full = Summarize(plant, cost, attempt.state, config.tol);
      full.iterations = attempt.iterations;
      full.damping = alpha;
      full.message = attempt.message;
      return full;
    } catch (const Error&) {
      report.info_rate = kInf;
      report.cost_rate = kInf;
      report.lagrangian = kInf;
      return report;
    }
  }
  report = Summarize(plant, cost, attempt.state, config.tol);
  report.iterations = attempt.iterations;
  report.converged = attempt.converged;
  report.damping = alpha;
  report.message = attempt.converged && attempt.message.empty() ? "converged"
                                                                : attempt.message;
  return report;
}

// Last resort: walk β up from just past the first critical value, where the
// solution is close to the uncontrolled one. Each step starts Newton from a
// secant prediction through the last two solutions.
SolveReport ContinuationSolve(const PlantSpec& plant, const CostSpec& cost, double beta,
                              const SolverConfig& config) {
  SolveReport failed;
  failed.message = "continuation fallback did not reach the target β";
  const FixedPointState zero = BetaZeroState(plant, cost, config.tol);
  if (zero.mode_values.size() == 0 || !(zero.mode_values(0) > 0.0)) return failed;
  const double critical = 1.0 / zero.mode_values(0);
  if (beta <= critical) return failed;
  double current = std::min(1.01 * critical, 0.5 * (critical + beta));
  SolveReport first = SolveOnce(plant, cost, current, zero, config);
  if (!first.converged) return failed;
  FixedPointState at = first.state;
  FixedPointState previous;
  double previous_beta = 0.0;
  int iterations = first.iterations;
  double ratio = 1.05;
  for (int step = 0; step < 1000 && current < beta; ++step) {
    const double next = std::min(beta, current * ratio);
    FixedPointState guess = at;
    if (!previous.empty()) {
      const double t = (next - current) / (current - previous_beta);
      try {
        guess = Unpack(plant, cost, Pack(at) + t * (Pack(at) - Pack(previous)), next,
                       config.tol);
      } catch (const Error&) {
        guess = at;
      }
    }
    Attempt trial = NewtonSolve(plant, cost, next, guess, config);
    if (!trial.converged) trial = NewtonSolve(plant, cost, next, at, config);
    iterations += trial.iterations;
    if (trial.converged) {
      previous = std::move(at);
      previous_beta = current;
      at = std::move(trial.state);
      current = next;
      ratio = std::min(1.0 + 1.5 * (ratio - 1.0), 1.5);
    } else {
      ratio = 1.0 + 0.25 * (ratio - 1.0);
      if (ratio - 1.0 < 1e-6) break;
    }
  }
  if (current < beta) return failed;
  SolveReport report = Summarize(plant, cost, at, config.tol);
  report.converged = report.max_residual() < ResidualTolerance(at, config.tol);
  report.iterations = iterations;
  report.message = report.converged ? "converged (β continuation)" : failed.message;
  return report;
}

}  // namespace

void SolverConfig::Validate() const {
  tol.Validate();
  if (max_outer_iters < 1 || !(damping > 0.0) || damping > 1.0 ||
      !(fixed_point_tol > 0.0) || multi_starts < 0) {
    throw ArgumentError("SolverConfig: invalid settings");
  }
}

double ResidualTolerance(const FixedPointState& state, const TolerancePolicy& tol) {
  if (!std::isfinite(state.beta) || state.active_coeffs.size() == 0) return tol.res;
  const double gap = 1.0 - state.active_coeffs.maxCoeff();
  if (!(gap > 0.0)) return tol.res;
  // Σx̂y|x̂u shrinks like (1 − d) against Σx̂y; that many digits are lost.
  return std::max(tol.res, 64.0 * std::numeric_limits<double>::epsilon() / gap);
}

double SolveReport::max_residual() const {
  double worst = 0.0;
  for (const auto& [name, value] : residuals) worst = std::max(worst, value);
  return worst;
}

void ForwardStep(const PlantSpec& plant, FixedPointState* state, StepMode mode,
                 const TolerancePolicy& tol) {
  auto& st = *state;
  if (mode == StepMode::kSingleSweep) {
    st.state_cov = ClosedLoopStateCov(plant, st.L, st.control_estimate_cov,
                                      st.state_cov, tol);
  } else {
    const MatrixXd closed = plant.A + plant.B * st.L;
    const MatrixXd& sxu = st.control_estimate_cov;
    const MatrixXd forcing = closed * sxu * closed.transpose() -
                             plant.A * sxu * plant.A.transpose() +
                             plant.process_noise;
    try {
      st.state_cov = ClipToPsd(SolveStein(plant.A, Symmetrize(forcing), tol), tol);
    } catch (const Error& e) {
      throw NumericalError(
          std::string("closed loop unstable under current gain: ") + e.what());
    }
  }
  st.obs = ObservationStatistics(plant, st.state_cov, tol);
}

MatrixXd SnrMatrix(const MatrixXd& estimate_cov, const MatrixXd& control_estimate_cov,
                   const TolerancePolicy& tol) {
  const double scale = TopEigenvalue(estimate_cov);
  return Symmetrize(PinvPsd(estimate_cov - control_estimate_cov, tol, scale) -
                    PinvPsd(estimate_cov, tol, scale));
}

void GainsFromCostToGo(const PlantSpec& plant, const CostSpec& cost,
                       FixedPointState* state, const TolerancePolicy& tol) {
  auto& st = *state;
  const MatrixXd curvature =
      Symmetrize(cost.R + plant.B.transpose() * st.S * plant.B);
  const SymEigen e = EvdSym(curvature);
  const double top = std::max(e.values(0), 0.0);
  if (e.values.minCoeff() < -tol.rank * top) {
    throw NumericalError(
        "indefinite control curvature: R + BᵀSB has eigenvalue " +
        std::to_string(e.values.minCoeff()));
  }
  st.L = -PinvPsd(curvature, tol) * plant.B.transpose() * st.S * plant.A;
  st.N = Symmetrize(st.L.transpose() * curvature * st.L);
}

void BackwardStep(const PlantSpec& plant, const CostSpec& cost,
                  FixedPointState* state, double beta, StepMode mode,
                  const TolerancePolicy& tol) {
  auto& st = *state;
  st.M = InfoCurvature(plant, state, beta, tol);
  if (mode == StepMode::kSingleSweep) {
    st.S = Symmetrize(cost.Q + plant.A.transpose() * st.S * plant.A - st.M);
  } else {
    st.S = SolveStein(plant.A.transpose(), Symmetrize(cost.Q - st.M), tol);
  }
  GainsFromCostToGo(plant, cost, state, tol);
}

void WaterfillStep(FixedPointState* state, double beta, const TolerancePolicy& tol) {
  auto& st = *state;
  const MatrixXd& sxy = st.obs.estimate_cov;
  if (!(beta > 0.0)) throw ArgumentError("WaterfillStep(): β must be positive");
  if (std::isinf(beta)) {
    const ModeBasis basis = ModeDecomposition(sxy, st.N, tol);
    st.modes = basis.vectors;
    st.mode_values = basis.values;
    const double top = std::max(basis.values.size() ? basis.values(0) : 0.0, 0.0);
    st.active_coeffs = VectorXd::Zero(basis.values.size());
    for (Eigen::Index i = 0; i < basis.values.size(); ++i) {
      if (top > 0.0 && basis.values(i) > tol.rank * top) st.active_coeffs(i) = 1.0;
    }
    st.control_estimate_cov = sxy;
    st.Z = MatrixXd();
    return;
  }
  const WaterfillResult wf = SolveWaterfill(sxy, beta * st.N, tol);
  st.modes = wf.V;
  st.mode_values = wf.lambda / beta;
  st.active_coeffs = wf.d;
  st.control_estimate_cov = wf.X;
  st.Z = SnrMatrix(sxy, st.control_estimate_cov, tol);
}

FixedPointState BetaZeroState(const PlantSpec& plant, const CostSpec& cost,
                              const TolerancePolicy& tol) {
  ValidateOrThrow(plant, cost, tol);
  const int n = plant.state_dim();
  FixedPointState st;
  st.beta = 0.0;
  st.state_cov = UncontrolledLyapunov(plant, tol);
  st.obs = ObservationStatistics(plant, st.state_cov, tol);
  st.S = DualLyapunov(plant, cost, tol);
  st.M = MatrixXd::Zero(n, n);
  GainsFromCostToGo(plant, cost, &st, tol);
  const ModeBasis basis = ModeDecomposition(st.obs.estimate_cov, st.N, tol);
  st.modes = basis.vectors;
  st.mode_values = basis.values;
  st.active_coeffs = VectorXd::Zero(n);
  st.control_estimate_cov = MatrixXd::Zero(n, n);
  st.Z = MatrixXd::Zero(n, n);
  return st;
}

SolveReport SolveFixedPoint(const PlantSpec& plant, const CostSpec& cost, double beta,
                            const FixedPointState& init, const SolverConfig& config) {
  config.Validate();
  if (!(beta >= 0.0)) throw ArgumentError("SolveFixedPoint(): β must be ≥ 0");
  ValidateOrThrow(plant, cost, config.tol);
  if (beta == 0.0) {
    SolveReport report = Summarize(plant, cost, BetaZeroState(plant, cost, config.tol),
                                   config.tol);
    report.converged = report.max_residual() < config.tol.res;
    report.message = report.converged ? "converged" : "β = 0 residuals above tolerance";
    return report;
  }
  const FixedPointState start =
      init.empty() ? BetaZeroState(plant, cost, config.tol) : init;
  const int n = plant.state_dim();
  if (start.state_cov.rows() != n || start.S.rows() != n ||
      start.L.rows() != plant.control_dim() ||
      start.control_estimate_cov.rows() != n) {
    throw DimensionError("SolveFixedPoint(): initial state does not match the plant");
  }

  SolveReport best = SolveOnce(plant, cost, beta, start, config);
  for (int j = 0; j < config.multi_starts; ++j) {
    const FixedPointState alt =
        PerturbedStart(start, config.multi_start_seed, j, config.tol);
    SolveReport candidate = SolveOnce(plant, cost, beta, alt, config);
    const bool better = candidate.converged &&
                        (!best.converged || candidate.lagrangian < best.lagrangian);
    if (better) best = std::move(candidate);
  }
  if (!best.converged && std::isfinite(beta)) {
    SolveReport continued = ContinuationSolve(plant, cost, beta, config);
    if (continued.converged) best = std::move(continued);
  }
  return best;
}

double InfoRate(const FixedPointState& state) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < state.active_coeffs.size(); ++i) {
    const double d = state.active_coeffs(i);
    if (d >= 1.0) return kInf;
    if (d > 0.0) sum -= 0.5 * std::log1p(-d);
  }
  return sum;
}

double InfoRatePdet(const FixedPointState& state, const TolerancePolicy& tol) {
  const MatrixXd& sxy = state.obs.estimate_cov;
  const double scale = TopEigenvalue(sxy);
  if (scale == 0.0) return 0.0;
  const MatrixXd conditional = Symmetrize(sxy - state.control_estimate_cov);
  if (RankPsd(conditional, tol, scale) < RankPsd(sxy, tol, scale)) return kInf;
  return std::max(
      0.5 * (LogPdet(sxy, tol, scale) - LogPdet(conditional, tol, scale)), 0.0);
}

double CostRate(const CostSpec& cost, const FixedPointState& state) {
  return ExpectedCostRate(cost, state.state_cov,
                          state.L * state.control_estimate_cov * state.L.transpose());
}

ControllerEstimator EstimatorForm(const FixedPointState& state,
                                  const TolerancePolicy& tol) {
  const MatrixXd& sxy = state.obs.estimate_cov;
  ControllerEstimator est;
  est.obs_gain = state.obs.gain;
  est.estimator_map = state.control_estimate_cov * PinvPsd(sxy, tol);
  const VectorXd& d = state.active_coeffs;
  const VectorXd noise = d.array() * (1.0 - d.array());
  const MatrixXd root = SqrtPsd(sxy);
  est.estimator_noise_cov = ClipToPsd(
      root * state.modes * noise.asDiagonal() * state.modes.transpose() * root, tol);
  est.feedback_gain = state.L;
  return est;
}

double LagrangianValue(const PlantSpec& plant, const CostSpec& cost,
                       const FixedPointState& state, double beta,
                       const TolerancePolicy& tol) {
  if (!(beta > 0.0) || std::isinf(beta)) {
    throw ArgumentError("LagrangianValue(): requires 0 < β < ∞");
  }
  const MatrixXd& S = state.S;
  const MatrixXd M = cost.Q + plant.A.transpose() * S * plant.A - S;
  return 0.5 * (InfoRatePdet(state, tol) * 2.0 / beta +
                (M * state.state_cov).trace() -
                (state.N * state.control_estimate_cov).trace() +
                (S * plant.process_noise).trace());
}

std::map<std::string, double> Residuals(const PlantSpec& plant, const CostSpec& cost,
                                        const FixedPointState& st,
                                        const TolerancePolicy& tol) {
  std::map<std::string, double> out;
  const MatrixXd& A = plant.A;
  const MatrixXd& B = plant.B;
  const MatrixXd& C = plant.C;
  const MatrixXd& sx = st.state_cov;
  const MatrixXd& sxu = st.control_estimate_cov;
  const MatrixXd& sxy = st.obs.estimate_cov;
  const MatrixXd& sy = st.obs.obs_cov;
  const MatrixXd& K = st.obs.gain;
  const double beta = st.beta;

  const MatrixXd closed = A + B * st.L;
  const MatrixXd controlled = closed * sxu * closed.transpose();
  const MatrixXd leftover = A * (sx - sxu) * A.transpose();
  out["state_cov"] = Residual(sx, controlled + leftover + plant.process_noise,
                              {controlled.norm(), leftover.norm(),
                               plant.process_noise.norm()});

  const MatrixXd csc = C * sx * C.transpose();
  out["obs_cov"] = Residual(sy, csc + plant.observation_noise,
                            {csc.norm(), plant.observation_noise.norm()});
  out["obs_gain"] = Residual(K * sy, sx * C.transpose());
  out["estimate_cov"] = Residual(sxy, K * sy * K.transpose());

  const MatrixXd KC = K * C;
  MatrixXd m_expected;
  if (std::isinf(beta)) {
    m_expected = KC.transpose() * st.N * KC;
  } else if (beta > 0.0) {
    m_expected = KC.transpose() * SnrMatrix(sxy, sxu, tol) * KC / beta;
  } else {
    m_expected = MatrixXd::Zero(sx.rows(), sx.cols());
  }
  out["info_curvature"] = Residual(st.M, m_expected);

  const MatrixXd ASA = A.transpose() * st.S * A;
  out["cost_to_go"] = Residual(st.S, cost.Q + ASA - st.M,
                               {cost.Q.norm(), ASA.norm(), st.M.norm()});

  const MatrixXd curvature = Symmetrize(cost.R + B.transpose() * st.S * B);
  const MatrixXd BSA = B.transpose() * st.S * A;
  out["feedback_gain"] = Residual(st.L, -PinvPsd(curvature, tol) * BSA);
  out["control_value"] = Residual(st.N, st.L.transpose() * curvature * st.L);
  out["stationarity"] = Residual(curvature * st.L * sxu, -BSA * sxu);

  if (std::isinf(beta)) {
    out["control_estimate_cov"] = Residual(sxu, sxy);
  } else if (beta > 0.0) {
    out["control_estimate_cov"] = Residual(sxu, SolveWaterfill(sxy, beta * st.N, tol).X);
  } else {
    out["control_estimate_cov"] = Residual(sxu, MatrixXd::Zero(sxu.rows(), sxu.cols()));
  }

  if (beta > 0.0 && std::isfinite(beta)) {
    const Eigen::Index n = sx.rows();
    const MatrixXd sxy_pinv = PinvPsd(sxy, tol);
    const MatrixXd inner = MatrixXd::Identity(n, n) - sxu * sxy_pinv;
    const MatrixXd zg =
        sxy_pinv * (inner.fullPivLu().solve(MatrixXd::Identity(n, n)) -
                    MatrixXd::Identity(n, n));
    out["gradient"] = Residual(st.M, KC.transpose() * zg * KC / beta);

    const PsdRoot root = SqrtPsdWithPinv(sxy, tol);
    const VectorXd weights =
        beta * st.active_coeffs.array() * st.mode_values.array();
    const MatrixXd z_spectral = root.pinv_root * st.modes * weights.asDiagonal() *
                                st.modes.transpose() * root.pinv_root;
    out["snr_identity"] = Residual(SnrMatrix(sxy, sxu, tol), z_spectral);
  }
  return out;
}

SolveReport Summarize(const PlantSpec& plant, const CostSpec& cost,
                      const FixedPointState& state, const TolerancePolicy& tol) {
  SolveReport report;
  report.state = state;
  report.controller = EstimatorForm(state, tol);
  report.cost_rate = CostRate(cost, state);
  if (std::isinf(state.beta)) {
    report.info_rate = (state.active_coeffs.array() > 0.0).any() ? kInf : 0.0;
    report.lagrangian = report.cost_rate;
  } else {
    report.info_rate = InfoRate(state);
    report.lagrangian = state.beta > 0.0
                            ? LagrangianValue(plant, cost, state, state.beta, tol)
                            : report.cost_rate;
  }
  report.residuals = Residuals(plant, cost, state, tol);
  return report;
}

}  // namespace minlqg
