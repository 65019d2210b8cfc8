#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "tse/frontier.hpp"

namespace tse::frontier {

namespace {

void validate(const AgentTypeSpec& t, std::size_t i) {
  const std::string who = "agent type " + std::to_string(i);
  if (!std::isfinite(t.r) || !std::isfinite(t.c) || !std::isfinite(t.l))
    throw ConfigError(who + " has non-finite parameters");
  if (!(t.c > 0.0)) throw ConfigError(who + ": cost must be > 0");
  if (!(t.l > 0.0)) throw ConfigError(who + ": load must be > 0");
  if (t.r < 0.0) throw ConfigError(who + ": return must be >= 0");
}

void validate_all(std::span<const AgentTypeSpec> types) {
  if (types.empty()) throw ConfigError("need at least one agent type");
  for (std::size_t i = 0; i < types.size(); ++i) validate(types[i], i);
}

double cross(const FrontierPoint& o, const FrontierPoint& p, const FrontierPoint& q) {
  return (p.a - o.a) * (q.b - o.b) - (p.b - o.b) * (q.a - o.a);
}

double scaled_tol(double v) { return 1e-12 * std::max(1.0, std::abs(v)); }

}  // namespace

std::vector<FrontierPoint> normalize_types(std::span<const AgentTypeSpec> types) {
  validate_all(types);
  std::vector<FrontierPoint> out;
  out.reserve(types.size());
  for (std::size_t i = 0; i < types.size(); ++i)
    out.push_back({types[i].l / types[i].c, types[i].r / types[i].c, i});
  return out;
}

bool FrontierReport::on_hull(std::size_t source) const {
  return std::find(hull.begin(), hull.end(), source) != hull.end();
}

FrontierReport roc_frontier(std::span<const FrontierPoint> points) {
  if (points.empty()) throw ConfigError("frontier needs at least one point");
  std::vector<FrontierPoint> pts(points.begin(), points.end());
  std::stable_sort(pts.begin(), pts.end(), [](const auto& p, const auto& q) {
    return p.a < q.a || (p.a == q.a && p.b > q.b);
  });

  FrontierReport rep;
  // Among equal a only the highest b (and exact duplicates of it) can be on the hull.
  std::vector<FrontierPoint> candidates;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i > 0 && pts[i].a == pts[i - 1].a && pts[i].b < candidates.back().b &&
        candidates.back().a == pts[i].a) {
      rep.dominated.push_back(pts[i].source);
      continue;
    }
    candidates.push_back(pts[i]);
  }

  std::vector<FrontierPoint> hull;
  for (const auto& p : candidates) {
    while (hull.size() >= 2) {
      const auto& o = hull[hull.size() - 2];
      const auto& m = hull.back();
      const double scale = std::max({1.0, std::abs(p.a - o.a), std::abs(p.b - o.b)});
      if (cross(o, m, p) > 1e-12 * scale * scale) {
        rep.dominated.push_back(m.source);
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }
  for (const auto& h : hull) rep.hull.push_back(h.source);
  std::sort(rep.dominated.begin(), rep.dominated.end());
  return rep;
}

void write_frontier_csv(std::ostream& out, std::span<const AgentTypeSpec> types,
                        std::span<const FrontierPoint> points, const FrontierReport& report) {
  out << "type,a,b,on_hull\n";
  for (const auto& p : points) {
    const auto& t = types[p.source];
    out << (t.label.empty() ? std::to_string(p.source) : t.label) << ',' << format_double(p.a)
        << ',' << format_double(p.b) << ',' << (report.on_hull(p.source) ? 1 : 0) << '\n';
  }
}

std::vector<std::size_t> PortfolioSolution::support(double tol) const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > tol) s.push_back(i);
  return s;
}

PortfolioSolution optimize_portfolio(std::span<const AgentTypeSpec> types, double budget,
                                     double capacity) {
  validate_all(types);
  if (!(budget > 0.0) || !std::isfinite(budget)) throw ConfigError("budget must be > 0");
  if (!(capacity > 0.0) || !std::isfinite(capacity)) throw ConfigError("capacity must be > 0");
  const std::size_t n = types.size();

  // Primal vertices: origin, single types at their tighter bound, and pairs
  // with both constraints binding.
  std::vector<std::vector<double>> vertices;
  vertices.emplace_back(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(n, 0.0);
    v[i] = std::min(budget / types[i].c, capacity / types[i].l);
    vertices.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double det = types[i].c * types[j].l - types[j].c * types[i].l;
      if (std::abs(det) <= 1e-14 * std::max(1.0, types[i].c * types[j].l)) continue;
      const double ni = (budget * types[j].l - types[j].c * capacity) / det;
      const double nj = (types[i].c * capacity - budget * types[i].l) / det;
      if (ni < -1e-12 || nj < -1e-12) continue;
      std::vector<double> v(n, 0.0);
      v[i] = std::max(ni, 0.0);
      v[j] = std::max(nj, 0.0);
      vertices.push_back(std::move(v));
    }
  }

  const auto value = [&](const std::vector<double>& v) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r += types[i].r * v[i];
    return r;
  };
  std::size_t best = 0;
  double best_r = value(vertices[0]);
  for (std::size_t k = 1; k < vertices.size(); ++k) {
    const double r = value(vertices[k]);
    if (r > best_r + scaled_tol(best_r)) {
      best = k;
      best_r = r;
    }
  }
  PortfolioSolution sol;
  sol.counts = vertices[best];
  sol.total_return = best_r;
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    if (k == best) continue;
    if (std::abs(value(vertices[k]) - best_r) <= scaled_tol(best_r)) {
      double diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(vertices[k][i] - sol.counts[i]));
      if (diff > 1e-9) sol.degenerate = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    sol.budget_used += types[i].c * sol.counts[i];
    sol.capacity_used += types[i].l * sol.counts[i];
  }
  sol.budget_binding = sol.budget_used >= budget - 1e-9 * std::max(1.0, budget);
  sol.capacity_binding = sol.capacity_used >= capacity - 1e-9 * std::max(1.0, capacity);

  // Dual: min mu B + lambda Q  s.t. mu c_i + lambda l_i >= r_i, mu, lambda >= 0.
  // Lines are mu = 0, lambda = 0 and each type constraint at equality.
  struct Line {
    double p, q, rhs;  // p mu + q lambda = rhs
  };
  std::vector<Line> lines{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}};
  for (const auto& t : types) lines.push_back({t.c, t.l, t.r});
  const auto feasible = [&](double mu, double lam) {
    if (mu < -1e-12 || lam < -1e-12) return false;
    for (const auto& t : types)
      if (mu * t.c + lam * t.l < t.r - 1e-12 * std::max(1.0, t.r)) return false;
    return true;
  };
  double best_obj = std::numeric_limits<double>::infinity();
  double best_mu = 0.0, best_lam = 0.0;
  int dual_ties = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const double det = lines[i].p * lines[j].q - lines[j].p * lines[i].q;
      if (std::abs(det) <= 1e-14) continue;
      double mu = (lines[i].rhs * lines[j].q - lines[j].rhs * lines[i].q) / det;
      double lam = (lines[i].p * lines[j].rhs - lines[j].p * lines[i].rhs) / det;
      if (!feasible(mu, lam)) continue;
      mu = std::max(mu, 0.0);
      lam = std::max(lam, 0.0);
      const double obj = mu * budget + lam * capacity;
      if (!std::isfinite(best_obj) || obj < best_obj - scaled_tol(best_obj)) {
        best_obj = obj;
        best_mu = mu;
        best_lam = lam;
        dual_ties = 0;
      } else if (std::abs(obj - best_obj) <= scaled_tol(best_obj) &&
                 (std::abs(mu - best_mu) > 1e-9 || std::abs(lam - best_lam) > 1e-9)) {
        ++dual_ties;
      }
    }
  }
  if (!std::isfinite(best_obj)) throw NumericalError("dual program has no feasible vertex");
  sol.mu = best_mu;
  sol.lambda = best_lam;
  if (dual_ties > 0) sol.degenerate = true;
  if (std::abs(best_obj - best_r) > 1e-9 * std::max(1.0, best_r))
    throw NumericalError("primal and dual optima disagree: " + format_double(best_r) + " vs " +
                         format_double(best_obj));
  return sol;
}

void write_solution_report(std::ostream& out, std::span<const AgentTypeSpec> types,
                           const PortfolioSolution& sol) {
  out << "total_return=" << format_double(sol.total_return) << '\n'
      << "mu=" << format_double(sol.mu) << '\n'
      << "lambda=" << format_double(sol.lambda) << '\n'
      << "budget_used=" << format_double(sol.budget_used) << '\n'
      << "capacity_used=" << format_double(sol.capacity_used) << '\n'
      << "budget_binding=" << (sol.budget_binding ? "true" : "false") << '\n'
      << "capacity_binding=" << (sol.capacity_binding ? "true" : "false") << '\n'
      << "degenerate=" << (sol.degenerate ? "true" : "false") << '\n';
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string name = types[i].label.empty() ? std::to_string(i) : types[i].label;
    out << "n_" << name << '=' << format_double(sol.counts[i]) << '\n';
  }
}

std::vector<double> optimal_unit_mix(std::span<const AgentTypeSpec> types, double load_cap) {
  validate_all(types);
  if (!(load_cap > 0.0)) throw ConfigError("load cap must be > 0");
  const std::size_t n = types.size();
  std::vector<double> best;
  double best_r = -std::numeric_limits<double>::infinity();
  const auto consider = [&](std::vector<double> alpha) {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r += alpha[i] * types[i].r;
    if (best.empty() || r > best_r + scaled_tol(best_r)) {
      best_r = r;
      best = std::move(alpha);
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (types[i].l <= load_cap + 1e-12) {
      std::vector<double> a(n, 0.0);
      a[i] = 1.0;
      consider(std::move(a));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (types[i].l == types[j].l) continue;
      // alpha l_i + (1 - alpha) l_j = load_cap
      const double alpha = (load_cap - types[j].l) / (types[i].l - types[j].l);
      if (alpha <= 0.0 || alpha >= 1.0) continue;
      std::vector<double> a(n, 0.0);
      a[i] = alpha;
      a[j] = 1.0 - alpha;
      consider(std::move(a));
    }
  }
  if (best.empty())
    throw ConfigError("unit mixture infeasible: every type's load exceeds the cap " +
                      format_double(load_cap));
  return best;
}

bool sparsity_check(std::span<const double> weights, std::size_t binding_constraints, double tol) {
  const auto active = static_cast<std::size_t>(
      std::count_if(weights.begin(), weights.end(), [tol](double w) { return w > tol; }));
  return active <= binding_constraints;
}

bool sparsity_check(const PortfolioSolution& sol, std::size_t binding_constraints) {
  return sparsity_check(sol.counts, binding_constraints);
}

EsdiReport esdi_verify(const PopulationState& state, const FitnessModel& model, double tol) {
  if (state.size() != model.dimension())
    throw ConfigError("state dimension does not match fitness model");
  const auto x = state.shares();
  const auto f = model.evaluate(x);
  double mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += x[i] * f[i];
  EsdiReport rep;
  double off = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (state.in_support(i))
      rep.roc_gap = std::max(rep.roc_gap, std::abs(f[i] - mean));
    else
      off = std::max(off, f[i] - mean);
  }
  rep.is_equilibrium = rep.roc_gap <= tol;
  rep.is_stable_candidate = rep.is_equilibrium && off <= tol;
  return rep;
}

}  // namespace tse::frontier
