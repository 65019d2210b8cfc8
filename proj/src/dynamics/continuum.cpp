#include <cmath>

#include "tse/dynamics.hpp"

namespace tse::dynamics {

std::vector<double> continuum_grid(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return s;
}

FitnessModel continuum_model(double alpha, double beta, std::span<const double> grid) {
  const std::size_t n = grid.size();
  Matrix pi(n, n);
  std::vector<double> offset(n);
  for (std::size_t i = 0; i < n; ++i) {
    offset[i] = std::pow(grid[i], alpha);
    const double cost = std::pow(grid[i], beta);
    for (std::size_t k = 0; k < n; ++k) pi(i, k) = -cost * grid[k];
  }
  return FitnessModel::linear(std::move(pi), std::move(offset));
}

ContinuumResult discretized_continuous_run(double alpha, double beta, std::size_t n,
                                           double horizon, double step) {
  if (n < 8) throw ConfigError("continuum grid needs at least 8 points");
  if (alpha > beta) throw ConfigError("return exponent must not exceed cost exponent");
  if (!(alpha >= 0.0)) throw ConfigError("return exponent must be >= 0");
  auto grid = continuum_grid(n);
  const auto model = continuum_model(alpha, beta, grid);
  const auto traj = integrate_replicator(PopulationState::uniform(n), model, horizon, step,
                                         IntegrationOptions{1u << 30});
  PopulationState final_state(traj.states.back(), 0.0);
  ContinuumResult res{std::move(grid), final_state, {}, 0.0, 0.0};
  const auto x = res.final_state.shares();
  for (std::size_t i = 0; i < n; ++i) {
    const double s = res.grid[i];
    if (s >= 0.3 && s <= 0.6) res.middle_mass += x[i];
    res.mean_s += s * x[i];
    const double left = i > 0 ? x[i - 1] : -1.0;
    const double right = i + 1 < n ? x[i + 1] : -1.0;
    if (x[i] > 1e-3 && x[i] >= left && x[i] > right) res.cluster_locations.push_back(s);
  }
  return res;
}

}  // namespace tse::dynamics
