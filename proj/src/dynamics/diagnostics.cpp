#include <algorithm>
#include <cmath>
#include <limits>

#include "tse/dynamics.hpp"
#include "tse/kernels.hpp"

namespace tse::dynamics {

PriceTerms price_decomposition(const PopulationState& state, const FitnessModel& model) {
  if (state.size() != model.dimension())
    throw ConfigError("state dimension does not match fitness model");
  const auto x = state.shares();
  const std::size_t n = x.size();
  const auto f = model.evaluate(x);
  std::vector<double> xdot(n);
  PriceTerms out;
  out.mean_fitness = kernels::replicator_field(x, f, xdot);
  for (std::size_t j = 0; j < n; ++j) {
    const double d = f[j] - out.mean_fitness;
    out.variance += x[j] * d * d;
  }
  const Matrix jac = model.jacobian(x);
  const auto jx = multiply(jac, xdot);
  out.externality = kernels::dot(x, jx);
  if (out.variance > 0.0) out.gamma_estimate = std::abs(out.externality) / out.variance;
  return out;
}

LyapunovReport check_lyapunov_monotone(const Trajectory& traj, const FitnessModel& model,
                                       double gamma, double tolerance) {
  if (traj.empty()) throw ConfigError("trajectory is empty");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");
  LyapunovReport rep;
  std::vector<double> mean(traj.size()), var(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& x = traj.states[k];
    const auto f = model.evaluate(x);
    const double m = kernels::dot(x, f);
    double v = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) v += x[j] * (f[j] - m) * (f[j] - m);
    mean[k] = m;
    var[k] = v;
  }
  if (traj.size() == 1) {
    rep.min_margin = 0.0;
    return rep;
  }
  rep.min_margin = std::numeric_limits<double>::infinity();
  rep.strict = true;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const double dt = traj.times[k + 1] - traj.times[k];
    if (!(dt > 0.0)) continue;
    const double rate = (mean[k + 1] - mean[k]) / dt;
    const double margin = rate - (1.0 - gamma) * 0.5 * (var[k] + var[k + 1]);
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -tolerance) rep.violating_times.push_back(traj.times[k]);
    if (margin <= tolerance) rep.strict = false;
    if (mean[k + 1] - mean[k] < -tolerance) rep.nondecreasing = false;
  }
  if (!std::isfinite(rep.min_margin)) rep.min_margin = 0.0;
  rep.monotone = rep.violating_times.empty();
  return rep;
}

namespace {

void grid_recurse(std::size_t dim, std::size_t remaining, std::size_t resolution,
                  std::vector<double>& point, std::vector<std::vector<double>>& out) {
  const std::size_t i = point.size();
  if (i + 1 == dim) {
    point.push_back(static_cast<double>(remaining) / static_cast<double>(resolution));
    out.push_back(point);
    point.pop_back();
    return;
  }
  for (std::size_t k = 0; k <= remaining; ++k) {
    point.push_back(static_cast<double>(k) / static_cast<double>(resolution));
    grid_recurse(dim, remaining - k, resolution, point, out);
    point.pop_back();
  }
}

}  // namespace

std::vector<std::vector<double>> simplex_grid(std::size_t dimension, std::size_t resolution) {
  std::vector<std::vector<double>> out;
  if (dimension == 0) return out;
  std::vector<double> point;
  point.reserve(dimension);
  grid_recurse(dimension, resolution, resolution, point, out);
  return out;
}

DominationResult detect_domination(const FitnessModel& model, std::size_t candidate,
                                   std::size_t grid_resolution) {
  if (grid_resolution < 2) throw ConfigError("domination grid resolution must be >= 2");
  if (!model.is_linear()) throw ConfigError("domination search needs a linear fitness model");
  const std::size_t n = model.dimension();
  if (candidate >= n) throw ConfigError("candidate type index out of range");
  DominationResult res;
  if (n == 1) return res;

  // Fitness is affine in the state, so the minimum of the gap over the state
  // grid is attained at one of the simplex vertices, which the grid contains.
  std::vector<std::vector<double>> fit_at_vertex;
  for (std::size_t v = 0; v < n; ++v) {
    std::vector<double> e(n, 0.0);
    e[v] = 1.0;
    fit_at_vertex.push_back(model.evaluate(e));
  }

  std::vector<std::size_t> others;
  for (std::size_t k = 0; k < n; ++k)
    if (k != candidate) others.push_back(k);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_alpha;
  for (const auto& alpha : simplex_grid(others.size(), grid_resolution)) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& f : fit_at_vertex) {
      double mix = 0.0;
      for (std::size_t i = 0; i < others.size(); ++i) mix += alpha[i] * f[others[i]];
      worst = std::min(worst, mix - f[candidate]);
    }
    if (worst > best) {
      best = worst;
      best_alpha = alpha;
    }
  }
  res.margin = best;
  if (best > 1e-12) {
    res.dominated = true;
    std::vector<double> mixture(n, 0.0);
    for (std::size_t i = 0; i < others.size(); ++i) mixture[others[i]] = best_alpha[i];
    res.mixture = std::move(mixture);
  }
  return res;
}

BasinReport basin_analysis(const std::function<double(double)>& g, std::size_t scan_points,
                           double tolerance) {
  if (scan_points < 2) throw ConfigError("basin scan needs at least two points");
  BasinReport rep;
  const auto at = [&](double x) {
    const double v = g(x);
    if (!std::isfinite(v)) throw NumericalError("basin function is non-finite at x = " +
                                                format_double(x));
    return v;
  };
  const double n = static_cast<double>(scan_points);
  // Scan from the right for the largest root strictly inside [0, 1).
  double hi_x = 1.0 - 1.0 / n;
  double hi_v = at(hi_x);
  bool found = false;
  double root = 1.0;
  if (hi_v == 0.0) {
    found = true;
    root = hi_x;
  }
  for (std::size_t i = scan_points - 1; !found && i-- > 0;) {
    const double lo_x = static_cast<double>(i) / n;
    const double lo_v = at(lo_x);
    if (lo_v == 0.0) {
      found = true;
      root = lo_x;
      break;
    }
    if ((lo_v < 0.0) != (hi_v < 0.0)) {
      double a = lo_x, b = hi_x, fa = lo_v;
      while (b - a > tolerance) {
        const double m = 0.5 * (a + b);
        const double fm = at(m);
        if (fm == 0.0) {
          a = b = m;
          break;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      found = true;
      root = 0.5 * (a + b);
      break;
    }
    hi_x = lo_x;
    hi_v = lo_v;
  }
  rep.sign_change_found = found;
  rep.point_of_no_return = found ? root : 1.0;

  const double g1 = at(1.0);
  if (g1 > tolerance) {
    rep.x1 = Stability::stable;
  } else if (g1 < -tolerance) {
    rep.x1 = Stability::unstable;
  } else {
    // With x' = x(1-x) g(x), near x = 1 the gap y = 1 - x obeys y' ~ g'(1) y^2.
    const double h = 1e-6;
    const double slope = (g1 - at(1.0 - h)) / h;
    if (slope < -1e-8)
      rep.x1 = Stability::stable;
    else if (slope > 1e-8)
      rep.x1 = Stability::unstable;
    else
      rep.x1 = Stability::neutral;
  }
  rep.x1_stable = rep.x1 == Stability::stable;
  return rep;
}

SwirlReport swirl_decompose(const Matrix& payoff) {
  if (!payoff.square()) throw ConfigError("swirl decomposition needs a square matrix");
  const std::size_t n = payoff.rows();
  SwirlReport rep{Matrix(n, n), Matrix(n, n), std::nullopt};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      rep.symmetric_part(i, j) = 0.5 * (payoff(i, j) + payoff(j, i));
      rep.antisymmetric_part(i, j) = 0.5 * (payoff(i, j) - payoff(j, i));
    }
  }
  const double s = rep.symmetric_part.frobenius_norm();
  if (s > 0.0) rep.swirl_ratio = rep.antisymmetric_part.frobenius_norm() / s;
  return rep;
}

}  // namespace tse::dynamics
