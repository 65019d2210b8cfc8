#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tse/population.hpp"

namespace tse::frontier {

struct AgentTypeSpec {
  double r = 0.0;  ///< return per instance per unit time
  double c = 1.0;  ///< budget cost per instance
  double l = 1.0;  ///< capacity load per instance
  std::string label;
};

struct FrontierPoint {
  double a = 0.0;  ///< load per cost
  double b = 0.0;  ///< return per cost
  std::size_t source = 0;
};

std::vector<FrontierPoint> normalize_types(std::span<const AgentTypeSpec> types);

struct FrontierReport {
  /// Source indices on the upper hull, ordered by increasing a.
  std::vector<std::size_t> hull;
  /// Source indices strictly below the hull.
  std::vector<std::size_t> dominated;
  bool on_hull(std::size_t source) const;
};

FrontierReport roc_frontier(std::span<const FrontierPoint> points);

/// Writes `type,a,b,on_hull`.
void write_frontier_csv(std::ostream& out, std::span<const AgentTypeSpec> types,
                        std::span<const FrontierPoint> points, const FrontierReport& report);

struct PortfolioSolution {
  std::vector<double> counts;
  double total_return = 0.0;
  double mu = 0.0;      ///< budget shadow price
  double lambda = 0.0;  ///< capacity shadow price
  bool budget_binding = false;
  bool capacity_binding = false;
  /// Several primal vertices or several dual vertices attain the optimum.
  bool degenerate = false;
  double budget_used = 0.0;
  double capacity_used = 0.0;

  std::vector<std::size_t> support(double tol = 1e-9) const;
  std::size_t binding_count() const { return budget_binding + capacity_binding; }
};

/// max sum r_i n_i  s.t. sum c_i n_i <= B, sum l_i n_i <= Q, n >= 0, solved
/// exactly by enumerating primal and dual vertices.
PortfolioSolution optimize_portfolio(std::span<const AgentTypeSpec> types, double budget,
                                     double capacity);

/// Writes the shadow-price block as `key=value` lines.
void write_solution_report(std::ostream& out, std::span<const AgentTypeSpec> types,
                           const PortfolioSolution& sol);

/// Convex unit mixture maximizing sum alpha_i r_i subject to sum alpha_i l_i <= load_cap.
std::vector<double> optimal_unit_mix(std::span<const AgentTypeSpec> types, double load_cap);

bool sparsity_check(std::span<const double> weights, std::size_t binding_constraints,
                    double tol = 1e-9);
bool sparsity_check(const PortfolioSolution& sol, std::size_t binding_constraints);

struct EsdiReport {
  bool is_equilibrium = false;
  bool is_stable_candidate = false;
  double roc_gap = 0.0;
};

EsdiReport esdi_verify(const PopulationState& state, const FitnessModel& model,
                       double tol = 1e-8);

struct Equilibrium {
  std::vector<double> state;
  double mean_fitness = 0.0;
  bool stable = false;
};

/// Nash equilibria by support enumeration plus grid points that satisfy the
/// equilibrium conditions; stability from off-support strictness and the
/// replicator Jacobian on the support face.
std::vector<Equilibrium> nash_equilibria(const FitnessModel& model,
                                         std::size_t grid_resolution = 40);

struct PoaReport {
  double optimum = 0.0;
  std::vector<double> optimum_state;
  double worst_equilibrium = 0.0;
  std::vector<double> worst_state;
  /// Worst equilibrium taken among stable ones; false when none is stable.
  bool worst_is_stable = false;
  std::optional<double> poa;       ///< empty when worst mean fitness <= 0
  double gamma = 0.0;              ///< max |E| / Var over the grid
  std::optional<double> bound;     ///< 1 / (1 - gamma); empty when gamma >= 1
  bool within_bound = false;
};

PoaReport price_of_anarchy(const FitnessModel& model, std::size_t grid_resolution = 40);

}  // namespace tse::frontier
