#pragma once

// Replicator-innovation piecewise-deterministic process on a finite strategy
// pool. Shares live on the full pool vector; inactive strategies hold zero.
// Between events the replicator flows on the active set. Innovations arrive
// on an exponential clock and bring the next pooled strategy in at mass eps0
// (residents scaled by 1 - eps0). A strategy whose share falls below eps_exit
// is removed and the rest renormalized.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tse/dynamics.hpp"
#include "tse/population.hpp"

namespace tse::pdmp {

struct PdmpConfig {
  PdmpConfig(FitnessModel m, std::vector<double> x0)
      : model(std::move(m)), initial_state(std::move(x0)) {}

  FitnessModel model;                  ///< fitness over the full pool vector
  std::vector<double> initial_state;   ///< full pool vector; positive entries are active
  std::vector<std::size_t> entry_order;  ///< empty: inactive strategies in index order
  double innovation_rate = 0.1;
  double entry_mass = 0.05;
  double exit_threshold = 0.01;
  double foster_c = 0.2;
  double horizon = 15.0;
  std::uint64_t seed = 0;
  double step = 0.01;
  double sample_dt = 0.1;
  /// Once entry_order is used up, keep cycling over the whole pool in index
  /// order so extinct strategies may re-enter. Without it innovations stop
  /// when the order is exhausted.
  bool recycle = false;

  void validate() const;
};

enum class EventKind { innovation, extinction };
const char* to_string(EventKind k);

struct PdmpEvent {
  double time = 0.0;
  EventKind kind = EventKind::innovation;
  std::size_t strategy = 0;
  std::vector<double> pre_state;
  std::vector<double> post_state;
};

struct PdmpResult {
  std::vector<PdmpEvent> events;
  dynamics::Trajectory trajectory;  ///< samples every sample_dt plus the horizon
  std::vector<std::size_t> active_set_size;
  std::vector<double> foster;
  bool pool_exhausted = false;
  std::size_t innovations = 0;
  std::size_t extinctions = 0;
  std::size_t initial_active = 0;
  double horizon = 0.0;
};

PdmpResult pdmp_simulate(const PdmpConfig& config);

/// -mean_fitness + c |S|
double foster_lyapunov(double mean_fitness, std::size_t active_set_size, double c);
double foster_lyapunov(std::span<const double> state, const FitnessModel& model,
                       std::size_t active_set_size, double c);

/// Time-weighted mean of |S| over [from, to] reconstructed from the event log.
double active_set_time_average(const PdmpResult& result, double from, double to);

struct StationaryReport {
  double mean_active = 0.0;
  double standard_error = 0.0;      ///< batch means over 10 batches
  double exit_hazard = 0.0;         ///< extinction rate while |S| exceeds mean_active
  double innovation_rate = 0.0;
  bool eeb_satisfied = true;        ///< exit_hazard > innovation_rate
  PdmpResult run;
};

StationaryReport stationary_active_set(PdmpConfig config, double horizon_long, double burn_in);

/// `time,kind,strategy,x_0,...`
void write_events_csv(std::ostream& out, const PdmpResult& result);
/// Dynamics trajectory columns plus `active_set_size,foster_value`.
void write_trajectory_csv(std::ostream& out, const PdmpResult& result, const FitnessModel& model);

}  // namespace tse::pdmp
