#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tse/core.hpp"
#include "tse/population.hpp"

namespace tse::dynamics {

double mean_fitness(const PopulationState& state, const FitnessModel& model);

struct PriceTerms {
  double mean_fitness = 0.0;
  double variance = 0.0;
  double externality = 0.0;
  /// |externality| / variance; empty when the variance vanishes.
  std::optional<double> gamma_estimate;
};

PriceTerms price_decomposition(const PopulationState& state, const FitnessModel& model);

/// Replicator velocity x_j (f_j - mean) at x. Returns the mean fitness.
double replicator_velocity(std::span<const double> x, const FitnessModel& model,
                           std::span<double> velocity);

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> states;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

struct IntegrationOptions {
  /// Emit every k-th step (the final state is always emitted).
  std::size_t emit_every = 1;
};

/// Classical RK4 with renormalization after every step. Throws NumericalError
/// naming the failure time when a fitness evaluation turns non-finite.
Trajectory integrate_replicator(const PopulationState& state, const FitnessModel& model,
                                double horizon, double step,
                                IntegrationOptions options = {});

/// Generic fixed-step RK4 on the simplex for vector fields other than the
/// plain replicator. `field(x, dx)` writes the velocity.
using VectorField = std::function<void(std::span<const double> x, std::span<double> dx)>;
Trajectory integrate_field(std::vector<double> x0, const VectorField& field, double horizon,
                           double step, double extinction_threshold = kDefaultExtinctionThreshold,
                           IntegrationOptions options = {});

/// Writes `t,x_0,...,x_{n-1},mean_fitness,variance,externality`.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const FitnessModel& model);

struct LyapunovReport {
  bool monotone = true;      ///< min_margin >= -tolerance
  bool nondecreasing = true; ///< mean fitness never drops by more than tolerance per step
  bool strict = false;       ///< every margin > tolerance
  double min_margin = 0.0;
  std::vector<double> violating_times;
};

/// Checks d/dt mean >= (1 - gamma) Var between consecutive samples using
/// finite differences of the mean and the midpoint-averaged variance.
LyapunovReport check_lyapunov_monotone(const Trajectory& traj, const FitnessModel& model,
                                       double gamma, double tolerance = 1e-9);

struct DominationResult {
  bool dominated = false;
  /// Full-length weight vector (zero at the candidate) when dominated.
  std::optional<std::vector<double>> mixture;
  /// min over the state grid of sum alpha_k f_k - f_d for the best mixture.
  double margin = 0.0;
};

DominationResult detect_domination(const FitnessModel& model, std::size_t candidate,
                                   std::size_t grid_resolution = 50);

/// All points of the simplex with coordinates k_i / resolution.
std::vector<std::vector<double>> simplex_grid(std::size_t dimension, std::size_t resolution);

enum class Stability { stable, unstable, neutral };

struct BasinReport {
  double point_of_no_return = 1.0;
  bool x1_stable = true;
  Stability x1 = Stability::stable;
  bool sign_change_found = false;
};

BasinReport basin_analysis(const std::function<double(double)>& g,
                           std::size_t scan_points = 10000, double tolerance = 1e-10);

struct SwirlReport {
  Matrix symmetric_part;
  Matrix antisymmetric_part;
  /// ||W||_F / ||S||_F; empty when ||S||_F = 0.
  std::optional<double> swirl_ratio;
};

SwirlReport swirl_decompose(const Matrix& payoff);

struct ImitationRun {
  Trajectory trajectory;
  bool absorbed = false;
  std::uint64_t events = 0;
};

/// Exact-event pairwise proportional imitation: an agent of type k switches
/// to type j at total rate N x_j x_k (f_j - f_k)_+, so the drift of the
/// empirical frequency equals the replicator field. Frequencies are sampled
/// on a grid of spacing `sample_dt`.
ImitationRun simulate_imitation(const FitnessModel& model, std::size_t population_size,
                                const PopulationState& initial, double horizon,
                                std::uint64_t seed, double sample_dt = 0.1);

/// Mean over replicates of the sup-norm gap between the imitation process
/// and the deterministic replicator on the shared sample grid.
double imitation_deviation(const FitnessModel& model, std::size_t population_size,
                           const PopulationState& initial, double horizon, std::uint64_t seed,
                           std::size_t replicates, double sample_dt = 0.1);

struct AdiabaticConfig {
  std::function<FitnessModel(double)> family;
  double theta_start = 0.0;
  double theta_end = 1.0;
  double epsilon0 = 0.01;
  /// Contraction rate estimate; only used for the predicted error bound.
  double lambda0 = 1.0;
  double step = 0.01;
  /// Horizon of the frozen run used when epsilon0 is zero.
  double frozen_horizon = 100.0;
};

struct AdiabaticReport {
  std::vector<double> epsilons;
  std::vector<double> max_errors;
  /// Predicted lag epsilon * max|dx*/dtheta| / lambda0 for epsilon0.
  double predicted_error = 0.0;
  double scaling_slope = 0.0;
};

/// Stable equilibrium of a frozen model found by integrating from several
/// starts; throws NumericalError when the starts disagree.
std::vector<double> tracked_equilibrium(const FitnessModel& model,
                                        std::span<const double> guess = {});

AdiabaticReport adiabatic_tracking_check(const AdiabaticConfig& config);

struct ContinuumResult {
  std::vector<double> grid;
  PopulationState final_state;
  /// Grid points at local maxima of the final mass (mass > 1e-3).
  std::vector<double> cluster_locations;
  double middle_mass = 0.0;  ///< mass on s in [0.3, 0.6]
  double mean_s = 0.0;
};

/// Midpoint grid s_i = (i + 1/2)/n on [0,1] with F(s, mu) = s^alpha - s^beta * mean(mu).
std::vector<double> continuum_grid(std::size_t n);
FitnessModel continuum_model(double alpha, double beta, std::span<const double> grid);
ContinuumResult discretized_continuous_run(double alpha, double beta, std::size_t n,
                                           double horizon, double step = 0.05);

}  // namespace tse::dynamics
