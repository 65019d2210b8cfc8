#include "tse/market.hpp"

#include <cmath>
#include <numeric>

namespace tse::market {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw ConfigError(msg);
}

double s_curve(double m, double k) { return 1.0 / (1.0 + std::exp(-k * (m - 0.5))); }

}  // namespace

void TippingParams::validate() const {
  require(std::isfinite(alpha) && std::isfinite(beta), "tipping parameters must be finite");
  require(beta >= 0.0, "beta must be >= 0");
  require(tau > 0.0, "tau must be > 0");
  require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
  require(spawn_elasticity >= 0.0, "spawn elasticity must be >= 0");
}

double myopic_slope(const TippingParams& p) {
  p.validate();
  return (p.alpha + p.beta) / p.tau;
}

double tipping_index(double slope, double rho) {
  if (rho * slope >= 1.0)
    throw DivergentExpectationsError("rho * S_myo = " + format_double(rho * slope) + " >= 1");
  return slope / (1.0 - rho * slope);
}

double spawn_adjusted_slope(const TippingParams& p) {
  return myopic_slope(p) * (1.0 + p.spawn_elasticity * p.beta / p.tau);
}

double beta_crit(double tau, double rho, double alpha, std::optional<double> beta_power) {
  require(tau > 0.0, "tau must be > 0");
  require(rho > -1.0, "rho must exceed -1");
  if (beta_power) require(*beta_power >= 0.0, "beta_power must be >= 0");
  return tau / (1.0 + rho) - alpha - beta_power.value_or(0.0);
}

std::vector<double> iterate_s_curve(double m0, double k, std::size_t steps) {
  require(m0 > 0.0 && m0 < 1.0, "m0 must lie in (0, 1)");
  require(k > 0.0, "steepness must be > 0");
  std::vector<double> m{m0};
  for (std::size_t t = 0; t < steps; ++t) m.push_back(s_curve(m.back(), k));
  return m;
}

double s_curve_upper_fixed_point(double k) {
  require(k > 0.0, "steepness must be > 0");
  if (k <= 4.0) return 0.5;
  // F(m) - m is positive just above 1/2 and negative at 1.
  double lo = 0.5 + 1e-9, hi = 1.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (s_curve(mid, k) > mid ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void ShadowParams::validate() const {
  require(gamma0 >= 0.0 && gamma0 < 1.0, "gamma0 must lie in [0, 1)");
  require(gamma1 >= 0.0, "gamma1 must be >= 0");
  require(nu > 0.0, "nu must be > 0");
}

double lineage_shadow(double institutions, const ShadowParams& p) {
  p.validate();
  require(institutions > 0.0, "institutional quality must be > 0");
  return p.gamma0 + p.gamma1 / std::pow(institutions, p.nu);
}

double institutional_floor(const ShadowParams& p) {
  p.validate();
  return std::pow(p.gamma1 / (1.0 - p.gamma0), 1.0 / p.nu);
}

double grim_trigger_threshold(double temptation, double reward, double punishment) {
  require(temptation >= reward && reward > punishment, "grim trigger needs T >= R > P");
  return (temptation - reward) / (temptation - punishment);
}

double n_player_threshold(double cost, double benefit, std::size_t n) {
  require(benefit > 0.0, "benefit must be > 0");
  require(n >= 2, "n-player threshold needs n >= 2");
  const double nn = static_cast<double>(n);
  return (cost * nn - benefit) / (benefit * (nn - 1.0));
}

ForkGame build_fork_game(const LineageUtility& a, const LineageUtility& b, double fork_cost) {
  require(fork_cost >= 0.0, "fork cost must be >= 0");
  ForkGame g;
  const LineageUtility* players[2] = {&a, &b};
  for (int p = 0; p < 2; ++p) {
    const auto& u = *players[p];
    auto& pay = p == 0 ? g.row : g.col;
    for (int mine = 0; mine < 2; ++mine) {
      for (int other = 0; other < 2; ++other) {
        double v;
        if (mine == 1 && other == 1)
          v = u.current;
        else if (mine == 1)
          v = u.proposed - fork_cost;
        else
          v = u.proposed;
        // Index by (row move, column move).
        if (p == 0)
          pay[mine][other] = v;
        else
          pay[other][mine] = v;
      }
    }
  }
  return g;
}

std::vector<std::pair<ForkMove, ForkMove>> pure_nash(const ForkGame& g) {
  std::vector<std::pair<ForkMove, ForkMove>> eq;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (g.row[r][c] >= g.row[1 - r][c] && g.col[r][c] >= g.col[r][1 - c])
        eq.emplace_back(static_cast<ForkMove>(r), static_cast<ForkMove>(c));
  return eq;
}

ForkReport fork_analysis(std::span<const double> losses, double compensation, double fork_cost,
                         const LineageUtility& a, const LineageUtility& b) {
  for (double x : losses) require(x > 0.0, "losses must be > 0");
  require(compensation >= 0.0, "compensation must be >= 0");
  ForkReport r;
  r.total_loss = std::accumulate(losses.begin(), losses.end(), 0.0);
  r.fork_viable = compensation < r.total_loss;
  r.game = build_fork_game(a, b, fork_cost);
  r.equilibria = pure_nash(r.game);
  for (const auto& e : r.equilibria) {
    const int er = static_cast<int>(e.first), ec = static_cast<int>(e.second);
    bool dominant = true;
    for (const auto& o : r.equilibria) {
      const int orr = static_cast<int>(o.first), oc = static_cast<int>(o.second);
      if (r.game.row[er][ec] < r.game.row[orr][oc] || r.game.col[er][ec] < r.game.col[orr][oc])
        dominant = false;
    }
    if (dominant && r.equilibria.size() > 1) r.pareto_dominant = e;
  }
  return r;
}

bool hamilton_invade(double relatedness, double benefit, double cost) {
  return relatedness * benefit > cost;
}

std::vector<double> usdi_step(std::span<const double> shares, std::span<const double> fitness,
                              double dt) {
  require(shares.size() == fitness.size() && !shares.empty(), "shares and fitness size mismatch");
  require(dt >= 0.0, "dt must be >= 0");
  double sum = 0.0;
  for (double y : shares) {
    require(y >= 0.0 && std::isfinite(y), "shares must be nonnegative");
    sum += y;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "shares must lie on the simplex");
  // Shift by the max fitness so exp never overflows.
  double fmax = fitness[0];
  for (double f : fitness) fmax = std::max(fmax, f);
  std::vector<double> out(shares.size());
  double z = 0.0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    out[i] = shares[i] * std::exp((fitness[i] - fmax) * dt);
    z += out[i];
  }
  for (double& y : out) y /= z;
  return out;
}

void GovernanceParams::validate() const {
  require(delta_h > 0.0 && delta_ai > 0.0, "preference intensities must be > 0");
  require(epsilon >= 0.0 && epsilon <= 1.0, "influence epsilon must lie in [0, 1]");
  require(lambda > 0.0, "environmental change rate must be > 0");
  require(cost_capture > 0.0 && cost_maladapt > 0.0, "capture and maladaptation costs must be > 0");
}

GovernanceThresholds governance_thresholds(const GovernanceParams& p) {
  p.validate();
  GovernanceThresholds t;
  t.capture_eps_crit = p.delta_h / (p.delta_h + p.delta_ai);
  t.coalition_min_weight = p.epsilon * p.delta_ai / p.delta_h;
  t.symbiosis_min_weight = p.epsilon * p.delta_ai / (p.delta_h + p.epsilon * p.delta_ai);
  t.optimal_bits = std::log(p.cost_capture / p.cost_maladapt) / p.lambda;
  return t;
}

UmpireReport umpire_game(std::size_t n, double beta, double endowment) {
  require(n >= 2, "Umpire game needs n >= 2");
  require(beta >= 0.0, "beta must be >= 0");
  require(endowment > 0.0, "endowment must be > 0");
  const double nn = static_cast<double>(n);
  UmpireReport r;
  r.g_nash = beta * beta / 4.0;
  r.g_per_lineage = r.g_nash / nn;
  if (r.g_per_lineage > endowment) {
    r.nash_at_cap = true;
    r.g_per_lineage = endowment;
    r.g_nash = nn * endowment;
  }
  r.u_nash = (endowment - r.g_per_lineage) + beta * std::sqrt(r.g_nash);

  // Planner: max n w - G + n beta sqrt(G), clipped to the aggregate endowment.
  r.g_social_unconstrained = (nn * beta / 2.0) * (nn * beta / 2.0);
  r.g_social = std::min(r.g_social_unconstrained, nn * endowment);
  r.social_clipped = r.g_social < r.g_social_unconstrained;
  r.u_social = (endowment - r.g_social / nn) + beta * std::sqrt(r.g_social);
  r.efficiency_loss = r.u_social > 0.0 ? (r.u_social - r.u_nash) / r.u_social : 0.0;
  return r;
}

EliteTipping elite_tipping(std::span<const double> weights, std::span<const double> indices) {
  require(weights.size() == indices.size() && !weights.empty(), "weights and indices size mismatch");
  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "weights must be nonnegative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "weights must sum to 1");
  EliteTipping e;
  const double n = static_cast<double>(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    e.weighted += weights[i] * indices[i];
    e.unweighted += indices[i] / n;
  }
  double cov = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i)
    cov += (weights[i] - 1.0 / n) * (indices[i] - e.unweighted);
  e.covariance = cov;
  e.covariance_positive = cov > 0.0;
  return e;
}

DiscountUnification unify_discounts(double b, double growth, double institutions,
                                    const ShadowParams& shadow) {
  require(b > 0.0 && b <= 1.0, "fundamental discount must lie in (0, 1]");
  require(b * growth < 1.0, "b * g must be < 1");
  ShadowParams p = shadow;
  p.gamma0 = 1.0 - b;
  DiscountUnification d;
  d.rho_amplifier = b / (1.0 - b * growth);
  d.lineage_shadow = lineage_shadow(institutions, p);
  d.delta_eff = 1.0 / d.lineage_shadow;
  return d;
}

double shadow_ceiling(double temptation, double reward, double punishment) {
  return 1.0 / grim_trigger_threshold(temptation, reward, punishment);
}

}  // namespace tse::market
