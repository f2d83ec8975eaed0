#include "commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <variant>

#include "minlqg/closed_loop_sim.h"
#include "minlqg/controller_forms.h"
#include "minlqg/errors.h"
#include "minlqg/matched_channel.h"
#include "minlqg/tradeoff.h"
#include "problem_file.h"

namespace minlqg::cli {

using Eigen::MatrixXd;
using nlohmann::json;

namespace {

double UnitScale(bool bits) { return bits ? 1.0 / std::log(2.0) : 1.0; }

std::string Csv(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename F>
int Guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InfeasibleCostError& e) {
    err << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const NotPsdError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const UnstablePlantError& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kBadArguments;
  }
}

json ControllerJson(const ControllerEstimator& est) {
  const ControllerRaw raw = EstimatorToRaw(est);
  return {{"K", WriteMatrix(est.obs_gain)},
          {"W", WriteMatrix(est.estimator_map)},
          {"Sigma_omega", WriteMatrix(est.estimator_noise_cov)},
          {"L", WriteMatrix(est.feedback_gain)},
          {"H", WriteMatrix(raw.feedback)},
          {"Sigma_eta", WriteMatrix(raw.noise_cov)}};
}

json ChannelJson(const MatchedChannel& ch, const ChannelReport& r, double scale) {
  json failures = json::array();
  for (const auto& f : r.failures) failures.push_back(f);
  json active = json::array();
  for (Eigen::Index i = 0; i < ch.active_coeffs.size(); ++i) active.push_back(ch.active_coeffs(i));
  return {{"dim", ch.active_dim()},
          {"active_coeffs", active},
          {"encoder", WriteMatrix(ch.encoder)},
          {"noise_cov", WriteMatrix(ch.noise_cov)},
          {"decoder", WriteMatrix(ch.decoder)},
          {"capacity", WriteNumber(r.capacity * scale)},
          {"residuals",
           {{"input_cov", r.input_cov},
            {"output_cov", r.output_cov},
            {"estimator_map", r.estimator_map},
            {"estimator_noise", r.estimator_noise},
            {"decoder_cov", r.decoder_cov},
            {"kl_quadratic", r.kl_quadratic},
            {"capacity_gap", WriteNumber(r.capacity_gap * scale)}}},
          {"ok", r.ok()},
          {"failures", failures}};
}

std::string UnitName(bool bits) { return bits ? "bits" : "nats"; }

}  // namespace

int RunSolve(const SolveOptions& opt, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&]() -> int {
    if (opt.beta.has_value() == opt.cost.has_value()) {
      throw ArgumentError("give exactly one of --beta and --cost");
    }
    if (opt.beta && !(*opt.beta >= 0.0)) throw ArgumentError("--beta must be >= 0");
    if (opt.cost && !std::isfinite(*opt.cost)) throw ArgumentError("--cost must be finite");
    const ProblemFile problem = LoadProblem(opt.problem);
    const bool bits = opt.bits || problem.units == Units::kBits;
    const double scale = UnitScale(bits);

    SolveReport report;
    if (opt.beta) {
      report = std::isinf(*opt.beta)
                   ? BetaInfSolution(problem.plant, problem.cost, problem.solver)
                   : SolveFixedPoint(problem.plant, problem.cost, *opt.beta, {}, problem.solver);
    } else {
      report = SolveForCost(problem.plant, problem.cost, *opt.cost, problem.solver);
    }

    json residuals = json::object();
    for (const auto& [name, value] : report.residuals) residuals[name] = WriteNumber(value);
    json doc = {{"beta", WriteNumber(report.state.beta)},
                {"converged", report.converged},
                {"message", report.message},
                {"iterations", report.iterations},
                {"order", report.state.order()},
                {"units", UnitName(bits)},
                {"info_rate", WriteNumber(report.info_rate * scale)},
                {"cost_rate", WriteNumber(report.cost_rate)},
                {"lagrangian", WriteNumber(report.lagrangian)},
                {"max_residual", WriteNumber(report.max_residual())},
                {"residuals", residuals},
                {"controller", ControllerJson(report.controller)}};
    if (opt.cost) doc["cost_target"] = *opt.cost;

    bool ok = report.converged;
    if (opt.channel) {
      if (std::isinf(report.state.beta)) {
        err << "warning: no matched channel at beta = inf (noiseless link)\n";
      } else {
        const MatchedChannel ch = BuildMatchedChannel(report.state, problem.solver.tol);
        const ChannelReport cr = CheckChannelProperties(ch, report.state, problem.solver.tol);
        doc["channel"] = ChannelJson(ch, cr, scale);
        for (const auto& f : cr.failures) err << "channel check failed: " << f << "\n";
        ok = ok && cr.ok();
      }
    }
    if (!report.converged) err << "solver did not converge: " << report.message << "\n";

    const std::string text = Dump(doc);
    if (opt.output.empty()) {
      out << text;
    } else {
      std::ofstream file(opt.output);
      if (!file) throw ArgumentError("cannot write " + opt.output);
      file << text;
    }
    return ok ? kOk : kCheckFailed;
  });
}

int RunSweep(const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&]() -> int {
    if (!(opt.beta_min > 0.0) || !(opt.beta_max > opt.beta_min) || !std::isfinite(opt.beta_max)) {
      throw ArgumentError("need 0 < --beta-min < --beta-max < inf");
    }
    if (opt.points < 2) throw ArgumentError("--points must be at least 2");
    const ProblemFile problem = LoadProblem(opt.problem);
    const double scale = UnitScale(opt.bits || problem.units == Units::kBits);
    const SweepResult sweep =
        SweepCurve(problem.plant, problem.cost,
                   BetaGrid(opt.beta_min, opt.beta_max, opt.points, opt.log_grid), problem.solver);

    bool all = true;
    out << "beta,cost_rate,info_rate,order,converged,lagrangian\n";
    for (const auto& p : sweep.points) {
      out << Csv(p.beta) << ',' << Csv(p.cost_rate) << ',' << Csv(p.info_rate * scale) << ','
          << p.order << ',' << (p.converged ? 1 : 0) << ',' << Csv(p.lagrangian) << '\n';
      all = all && p.converged;
    }
    for (const auto& t : sweep.transitions) {
      out << "#transition," << Csv(t.beta) << ',' << t.old_order << ',' << t.new_order << '\n';
    }
    for (const auto& w : sweep.warnings) err << "warning: " << w << "\n";
    if (!all) err << "some sweep points did not converge\n";
    return all ? kOk : kCheckFailed;
  });
}

namespace {

ControllerEstimator ReadEstimator(const json& c, const PlantSpec& plant) {
  const int n = plant.state_dim(), k = plant.obs_dim(), l = plant.control_dim();
  ControllerEstimator est;
  est.obs_gain = ReadMatrix(c.at("K"), n, k, "controller.K");
  est.estimator_map = ReadMatrix(c.at("W"), n, n, "controller.W");
  est.estimator_noise_cov = ReadMatrix(c.at("Sigma_omega"), n, n, "controller.Sigma_omega");
  est.feedback_gain = ReadMatrix(c.at("L"), l, n, "controller.L");
  return est;
}

MatchedChannel ReadChannel(const json& c, int n) {
  const int m = c.at("dim").get<int>();
  MatchedChannel ch;
  ch.active_coeffs.resize(m);
  const json& d = c.at("active_coeffs");
  if (!d.is_array() || static_cast<int>(d.size()) != m) {
    throw ArgumentError("channel.active_coeffs must have dim entries");
  }
  for (int i = 0; i < m; ++i) ch.active_coeffs(i) = ReadNumber(d[i], "channel.active_coeffs");
  ch.encoder = ReadMatrix(c.at("encoder"), m, n, "channel.encoder");
  ch.noise_cov = ReadMatrix(c.at("noise_cov"), m, m, "channel.noise_cov");
  ch.decoder = ReadMatrix(c.at("decoder"), n, m, "channel.decoder");
  return ch;
}

json Check(const std::string& name, double empirical, double analytic, double se, double scale) {
  const bool pass = std::abs(empirical - analytic) <= 3.0 * se;
  return {{"name", name},
          {"empirical", WriteNumber(empirical * scale)},
          {"analytic", WriteNumber(analytic * scale)},
          {"std_error", WriteNumber(se * scale)},
          {"pass", pass}};
}

}  // namespace

int RunSimulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err) {
  return Guarded(err, [&]() -> int {
    const ProblemFile problem = LoadProblem(opt.problem);
    const PlantSpec& plant = problem.plant;
    const CostSpec& cost = problem.cost;
    const TolerancePolicy& tol = problem.solver.tol;
    const double scale = UnitScale(opt.bits || problem.units == Units::kBits);

    const auto steps = opt.steps ? opt.steps : problem.sim.steps;
    const auto seed = opt.seed ? opt.seed : problem.sim.seed;
    const auto burn_opt = opt.burn_in ? opt.burn_in : problem.sim.burn_in;
    if (!steps || *steps < 1) throw ArgumentError("--steps is required and must be positive");
    if (!seed) throw ArgumentError("--seed is required");
    if (burn_opt && *burn_opt < 0) throw ArgumentError("--burn-in must be >= 0");

    SimController controller;
    std::string kind;
    bool record_info = true;
    ControllerEstimator est;
    if (opt.controller == "zero") {
      if (opt.beta) throw ArgumentError("--beta cannot be combined with --controller zero");
      controller = ControllerRaw{MatrixXd::Zero(plant.control_dim(), plant.obs_dim()),
                                 MatrixXd::Zero(plant.control_dim(), plant.control_dim())};
      kind = "zero";
      record_info = false;
    } else if (!opt.controller.empty()) {
      if (opt.beta) throw ArgumentError("--beta cannot be combined with --controller");
      const json artifact = ReadJsonFile(opt.controller);
      if (!artifact.contains("controller")) {
        throw ArgumentError(opt.controller + ": no \"controller\" object");
      }
      est = ReadEstimator(artifact.at("controller"), plant);
      if (artifact.contains("channel")) {
        controller = ChannelPipeline{est, ReadChannel(artifact.at("channel"), plant.state_dim())};
        kind = "channel";
      } else {
        controller = est;
        kind = "estimator";
      }
    } else {
      if (!opt.beta) throw ArgumentError("give --controller or --beta");
      if (!(*opt.beta >= 0.0) || std::isinf(*opt.beta)) {
        throw ArgumentError("--beta must be finite and >= 0");
      }
      const SolveReport report = SolveFixedPoint(plant, cost, *opt.beta, {}, problem.solver);
      if (!report.converged) {
        err << "solver did not converge: " << report.message << "\n";
        return kCheckFailed;
      }
      est = report.controller;
      controller = est;
      kind = "estimator";
    }

    const std::int64_t burn = burn_opt ? *burn_opt : DefaultBurnIn(plant, controller);
    if (*steps <= burn) {
      throw ArgumentError("--steps (" + std::to_string(*steps) + ") must exceed the burn-in (" +
                          std::to_string(burn) + ")");
    }
    SimConfig cfg;
    cfg.horizon = *steps;
    cfg.burn_in = burn;
    cfg.seed = *seed;
    cfg.batches = problem.sim.batches;
    cfg.record_joint = record_info;
    const SimStats stats = Rollout(plant, cost, controller, cfg);

    MatrixXd analytic_x;
    double analytic_cost = 0.0;
    if (kind == "zero") {
      analytic_x = UncontrolledLyapunov(plant, tol);
      analytic_cost = ExpectedCostRate(cost, analytic_x,
                                       MatrixXd::Zero(plant.control_dim(), plant.control_dim()));
    } else {
      const StationaryXU xu = StationaryJointEstimator(plant, est, tol);
      analytic_x = xu.state_cov;
      analytic_cost = ExpectedCostRate(cost, xu.state_cov, xu.control_cov);
    }

    json checks = json::array();
    checks.push_back(Check("cost_rate", stats.CostRate(), analytic_cost, stats.CostRateSe(), 1.0));

    const MatrixXd emp_x = stats.Block("x", "x");
    const MatrixXd se_x = stats.BlockSe("x", "x");
    bool x_pass = true;
    double worst_z = 0.0;
    for (Eigen::Index i = 0; i < emp_x.rows(); ++i) {
      for (Eigen::Index j = 0; j < emp_x.cols(); ++j) {
        const double dev = std::abs(emp_x(i, j) - analytic_x(i, j));
        x_pass = x_pass && dev <= 3.0 * se_x(i, j);
        if (se_x(i, j) > 0.0) worst_z = std::max(worst_z, dev / se_x(i, j));
      }
    }
    checks.push_back({{"name", "state_cov"},
                      {"empirical", WriteMatrix(emp_x)},
                      {"analytic", WriteMatrix(analytic_x)},
                      {"std_error", WriteMatrix(se_x)},
                      {"rel_error", RelativeResidual(emp_x, analytic_x)},
                      {"max_abs_z", worst_z},
                      {"pass", x_pass}});

    if (record_info) {
      const JointGaussian joint = ControllerJoint(plant, analytic_x, est);
      const double analytic_info = GaussianMutualInfo(joint, {"xhat_y"}, {"xhat_u"}, tol);
      if (std::isfinite(analytic_info)) {
        checks.push_back(Check("info_rate", EmpiricalInfo(stats, "xhat_y", "xhat_u", tol),
                               analytic_info, EmpiricalInfoSe(stats, "xhat_y", "xhat_u", tol),
                               scale));
      }
    }

    bool pass = true;
    for (const auto& c : checks) pass = pass && c.at("pass").get<bool>();
    const json doc = {{"controller", kind},
                      {"steps", *steps},
                      {"burn_in", burn},
                      {"seed", *seed},
                      {"batches", cfg.batches},
                      {"units", UnitName(scale != 1.0)},
                      {"checks", checks},
                      {"pass", pass}};
    out << Dump(doc);
    if (!pass) err << "simulation disagrees with the analytic prediction\n";
    return pass ? kOk : kCheckFailed;
  });
}

}  // namespace minlqg::cli
