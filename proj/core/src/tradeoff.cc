#include "minlqg/tradeoff.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "minlqg/errors.h"

namespace minlqg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TradeoffPoint ToPoint(double beta, const SolveReport& r) {
  TradeoffPoint p;
  p.beta = beta;
  p.cost_rate = r.cost_rate;
  p.info_rate = r.info_rate;
  p.order = r.state.order();
  p.converged = r.converged;
  p.lagrangian = r.lagrangian;
  return p;
}

}  // namespace

SolveReport BetaZeroSolution(const PlantSpec& plant, const CostSpec& cost,
                             const SolverConfig& config) {
  return SolveFixedPoint(plant, cost, 0.0, {}, config);
}

SolveReport BetaInfSolution(const PlantSpec& plant, const CostSpec& cost,
                            const SolverConfig& config) {
  return SolveFixedPoint(plant, cost, kInf, {}, config);
}

double FirstCriticalBeta(const SolveReport& beta_zero) {
  const auto& values = beta_zero.state.mode_values;
  if (values.size() == 0 || !(values(0) > 0.0)) return kInf;
  return 1.0 / values(0);
}

std::vector<double> BetaGrid(double lo, double hi, int points, bool log_spaced) {
  if (points < 2 || !(lo < hi) || (log_spaced && !(lo > 0.0)) || lo < 0.0) {
    throw ArgumentError("BetaGrid(): need 0 ≤ lo < hi, points ≥ 2 (lo > 0 for log)");
  }
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    grid[i] = log_spaced ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

SweepResult SweepCurve(const PlantSpec& plant, const CostSpec& cost,
                       const std::vector<double>& beta_grid,
                       const SolverConfig& config, double transition_rel_tol) {
  for (size_t i = 0; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] > 0.0) || (i > 0 && !(beta_grid[i] > beta_grid[i - 1]))) {
      throw ArgumentError("SweepCurve(): grid must be positive and strictly ascending");
    }
  }
  SweepResult out;
  SolveReport prev = BetaZeroSolution(plant, cost, config);
  double prev_beta = 0.0;

  for (double beta : beta_grid) {
    SolveReport rep = SolveFixedPoint(plant, cost, beta, prev.state, config);
    const int new_order = rep.state.order();
    int lo_order = prev.state.order();
    if (rep.converged && prev.converged && new_order != lo_order) {
      double lo = prev_beta;
      FixedPointState lo_state = prev.state;
      // Walk through every order change between the two grid points.
      for (int guard = 0; lo_order != new_order && guard <= plant.state_dim(); ++guard) {
        double hi = beta;
        int hi_order = new_order;
        while (hi - lo > transition_rel_tol * hi) {
          const double mid = 0.5 * (lo + hi);
          SolveReport probe = SolveFixedPoint(plant, cost, mid, lo_state, config);
          const int order = probe.state.order();
          if (order == lo_order) {
            lo = mid;
            if (probe.converged) lo_state = probe.state;
          } else {
            hi = mid;
            hi_order = order;
          }
        }
        out.transitions.push_back({0.5 * (lo + hi), lo_order, hi_order});
        SolveReport across = SolveFixedPoint(plant, cost, hi, lo_state, config);
        lo = hi;
        lo_state = across.state;
        lo_order = across.state.order();
        if (lo_order != hi_order) break;
      }
    }
    out.points.push_back(ToPoint(beta, rep));
    if (rep.converged) {
      prev = std::move(rep);
      prev_beta = beta;
    }
  }

  const TradeoffPoint* last = nullptr;
  for (const auto& p : out.points) {
    if (!p.converged) continue;
    if (last != nullptr) {
      std::ostringstream msg;
      if (p.cost_rate > last->cost_rate + 1e-8) {
        msg << "cost rate increased between beta=" << last->beta << " and " << p.beta;
        out.warnings.push_back(msg.str());
      }
      if (p.info_rate < last->info_rate - 1e-8) {
        std::ostringstream m2;
        m2 << "info rate decreased between beta=" << last->beta << " and " << p.beta;
        out.warnings.push_back(m2.str());
      }
    }
    last = &p;
  }
  return out;
}

SolveReport SolveForCost(const PlantSpec& plant, const CostSpec& cost, double c,
                         const SolverConfig& config) {
  if (!std::isfinite(c)) throw ArgumentError("SolveForCost(): c must be finite");
  SolveReport zero = BetaZeroSolution(plant, cost, config);
  // 𝒥(0) itself is met by the order-0 controller; allow for its round-off.
  if (c >= zero.cost_rate - 1e-12 * std::max(1.0, zero.cost_rate)) return zero;
  SolveReport inf = BetaInfSolution(plant, cost, config);
  if (c < inf.cost_rate) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "cost " << c << " is below the minimum achievable cost " << inf.cost_rate;
    throw InfeasibleCostError(msg.str());
  }
  const double tol_c = 1e-10 * std::max(1.0, c);

  double lo = 1e-6;
  SolveReport lo_rep = SolveFixedPoint(plant, cost, lo, zero.state, config);
  double hi = 1.0;
  SolveReport hi_rep = SolveFixedPoint(plant, cost, hi, lo_rep.state, config);
  while (hi_rep.cost_rate > c) {
    if (hi > 1e9) return inf;
    lo = hi;
    lo_rep = std::move(hi_rep);
    hi *= 2.0;
    hi_rep = SolveFixedPoint(plant, cost, hi, lo_rep.state, config);
  }
  while (std::abs(hi_rep.cost_rate - c) > tol_c && hi / lo - 1.0 > 1e-14) {
    const double mid = std::sqrt(lo * hi);
    SolveReport probe = SolveFixedPoint(plant, cost, mid, lo_rep.state, config);
    if (probe.cost_rate > c) {
      lo = mid;
      lo_rep = std::move(probe);
    } else {
      hi = mid;
      hi_rep = std::move(probe);
    }
  }
  return hi_rep;
}

SlopeReport CheckSlope(const SweepResult& sweep) {
  std::vector<TradeoffPoint> pts;
  for (const auto& p : sweep.points) {
    if (p.converged && std::isfinite(p.info_rate)) pts.push_back(p);
  }
  SlopeReport out;
  for (size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].cost_rate > pts[i - 1].cost_rate + 1e-8 ||
        pts[i].info_rate < pts[i - 1].info_rate - 1e-8) {
      out.monotone = false;
    }
  }

  for (size_t i = 1; i + 1 < pts.size(); ++i) {
    const auto& a = pts[i - 1];
    const auto& b = pts[i];
    const auto& c = pts[i + 1];
    if (a.order < 1 || b.order < 1 || c.order < 1) continue;
    // Nonuniform three-point derivative of ℐ in 𝒥.
    const double h1 = b.cost_rate - a.cost_rate;
    const double h2 = c.cost_rate - b.cost_rate;
    if (h1 == 0.0 || h2 == 0.0 || h1 + h2 == 0.0) continue;
    const double slope = -h2 / (h1 * (h1 + h2)) * a.info_rate +
                         (h2 - h1) / (h1 * h2) * b.info_rate +
                         h1 / (h2 * (h1 + h2)) * c.info_rate;
    SlopeSample s;
    s.beta = b.beta;
    s.slope = slope;
    s.expected = -b.beta;
    s.rel_error = std::abs(slope - s.expected) / std::abs(s.expected);
    out.max_rel_error = std::max(out.max_rel_error, s.rel_error);
    out.samples.push_back(s);
  }

  // Convexity of ℐ(𝒥): sort by 𝒥 and drop samples that coincide in 𝒥.
  std::vector<TradeoffPoint> byj = pts;
  std::sort(byj.begin(), byj.end(), [](const TradeoffPoint& x, const TradeoffPoint& y) {
    return x.cost_rate < y.cost_rate;
  });
  std::vector<TradeoffPoint> distinct;
  for (const auto& p : byj) {
    if (!distinct.empty() &&
        p.cost_rate - distinct.back().cost_rate <= 1e-9 * std::abs(p.cost_rate)) {
      continue;
    }
    distinct.push_back(p);
  }
  out.min_second_difference = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i + 1 < distinct.size(); ++i) {
    const auto& a = distinct[i - 1];
    const auto& b = distinct[i];
    const auto& c = distinct[i + 1];
    const double left = (b.info_rate - a.info_rate) / (b.cost_rate - a.cost_rate);
    const double right = (c.info_rate - b.info_rate) / (c.cost_rate - b.cost_rate);
    const double second = (right - left) / (c.cost_rate - a.cost_rate);
    out.min_second_difference = std::min(out.min_second_difference, second);
    if (second < -1e-8) out.convex = false;
  }
  if (distinct.size() < 3) out.min_second_difference = 0.0;
  return out;
}

}  // namespace minlqg
