#pragma once

// Closed-form market and governance layer: tipping indices, lineage shadow,
// cooperation thresholds, the fork game, Hamilton's rule, utility-type
// selection, governance thresholds, the Umpire public-good game, elite
// tipping and discount unification.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tse/core.hpp"

namespace tse::market {

/// rho * S_myo >= 1: expectations feed back without bound.
class DivergentExpectationsError : public ConfigError {
public:
  using ConfigError::ConfigError;
};

struct TippingParams {
  double alpha = 0.0;
  double beta = 0.0;
  double tau = 1.0;
  double rho = 0.0;
  double spawn_elasticity = 0.0;

  void validate() const;
};

double myopic_slope(const TippingParams& p);
double tipping_index(double slope, double rho);
double spawn_adjusted_slope(const TippingParams& p);
/// tau / (1 + rho) - alpha, minus beta_power when given.
double beta_crit(double tau, double rho, double alpha, std::optional<double> beta_power = std::nullopt);

/// m <- 1 / (1 + exp(-k (m - 1/2))). Returns m_0 .. m_steps.
std::vector<double> iterate_s_curve(double m0, double k, std::size_t steps);
/// Linearizing the S-curve at 1/2 gives slope k / 4, so k = 4 T matches index T.
inline double default_steepness(double tipping) { return 4.0 * tipping; }
/// The stable fixed point above 1/2 (or 1/2 itself when k <= 4).
double s_curve_upper_fixed_point(double k);

struct ShadowParams {
  double gamma0 = 0.0;
  double gamma1 = 0.0;
  double nu = 1.0;

  void validate() const;
};

double lineage_shadow(double institutions, const ShadowParams& p);
/// (gamma1 / (1 - gamma0))^(1/nu)
double institutional_floor(const ShadowParams& p);

double grim_trigger_threshold(double temptation, double reward, double punishment);
/// (c n - b) / (b (n - 1))
double n_player_threshold(double cost, double benefit, std::size_t n);

struct LineageUtility {
  std::string label;
  double current = 0.0;   ///< U(g)
  double proposed = 0.0;  ///< U(g')
};

enum class ForkMove { stay = 0, fork = 1 };

/// payoff[row_move][col_move] for each player.
struct ForkGame {
  double row[2][2] = {};
  double col[2][2] = {};
};

/// All stay: U(g'). All fork: U(g). Staying while the other forks: U(g').
/// A solo fork fails: U(g') - c_f.
ForkGame build_fork_game(const LineageUtility& a, const LineageUtility& b, double fork_cost);
std::vector<std::pair<ForkMove, ForkMove>> pure_nash(const ForkGame& game);

struct ForkReport {
  bool fork_viable = false;
  double total_loss = 0.0;
  ForkGame game;
  std::vector<std::pair<ForkMove, ForkMove>> equilibria;
  /// Equilibrium that weakly improves both players over every other one.
  std::optional<std::pair<ForkMove, ForkMove>> pareto_dominant;
};

ForkReport fork_analysis(std::span<const double> losses, double compensation, double fork_cost,
                         const LineageUtility& a, const LineageUtility& b);

bool hamilton_invade(double relatedness, double benefit, double cost);

/// Exact flow of the utility-type replicator over dt for constant fitness:
/// y_i <- y_i exp(F_i dt) / sum_j y_j exp(F_j dt).
std::vector<double> usdi_step(std::span<const double> shares, std::span<const double> fitness,
                              double dt);

struct GovernanceParams {
  double delta_h = 1.0;
  double delta_ai = 1.0;
  double epsilon = 0.0;
  double lambda = 1.0;
  double cost_capture = 1.0;
  double cost_maladapt = 1.0;

  void validate() const;
};

struct GovernanceThresholds {
  double capture_eps_crit = 0.0;
  double coalition_min_weight = 0.0;
  double symbiosis_min_weight = 0.0;
  double optimal_bits = 0.0;
};

GovernanceThresholds governance_thresholds(const GovernanceParams& p);

struct UmpireReport {
  double g_nash = 0.0;
  double g_per_lineage = 0.0;
  double u_nash = 0.0;
  bool nash_at_cap = false;
  double g_social_unconstrained = 0.0;
  double g_social = 0.0;
  bool social_clipped = false;
  double u_social = 0.0;
  double efficiency_loss = 0.0;
};

UmpireReport umpire_game(std::size_t n, double beta, double endowment);

struct EliteTipping {
  double weighted = 0.0;
  double unweighted = 0.0;
  double covariance = 0.0;  ///< weighted - unweighted = n Cov(w, T)
  bool covariance_positive = false;
};

EliteTipping elite_tipping(std::span<const double> weights, std::span<const double> indices);

struct DiscountUnification {
  double rho_amplifier = 0.0;
  double lineage_shadow = 0.0;
  double delta_eff = 0.0;
};

/// rho = b / (1 - b g); shadow with gamma0 = 1 - b and the given gamma1, nu;
/// delta_eff = 1 / shadow.
DiscountUnification unify_discounts(double b, double growth, double institutions,
                                    const ShadowParams& shadow);
/// (T - P) / (T - R): the largest shadow that still sustains grim-trigger cooperation.
double shadow_ceiling(double temptation, double reward, double punishment);

}  // namespace tse::market
