#pragma once

// Biased rock-paper-scissors Hopf lab: closed-form critical curve and first
// Lyapunov coefficient, plus a simulated family whose linear growth rate at
// the interior point is -(kappa - kappa_c(mu)) / 6, used to measure limit-cycle
// amplitudes and periods.
//
// Simulated family: replicator-mutator flow
//   dx_i = x_i (f_i - mean) + m (1 - 3 x_i),  f = Pi(kappa') x,
//   kappa' = kappa - kappa_c(mu) - 18 m,
// with mutation m > 0 so the bifurcation is generic (plain RPS is a centre at
// kappa' = 0).

#include <iosfwd>
#include <optional>
#include <utility>
#include <span>
#include <vector>

#include "tse/core.hpp"
#include "tse/dynamics.hpp"

namespace tse::hopf {

struct BiasedRpsConfig {
  double kappa = 0.0;
  double mu = 0.2;
  double mutation = 0.02;

  void validate() const;
};

/// [[0, -1, 1+k], [1+k, 0, -1], [-1, 1+k, 0]]
Matrix biased_rps_matrix(double kappa);

double hopf_curve(double mu);
double first_lyapunov_coefficient(double mu);
/// sqrt((1 - 3 mu) / (54 sqrt(3) mu))
double amplitude_coefficient(double mu);

struct PredictedAmplitude {
  double value = 0.0;
  bool stable_side = false;  ///< kappa >= kappa_c: no cycle, value 0
};

PredictedAmplitude predicted_amplitude(double kappa, double mu);

dynamics::VectorField biased_rps_field(const BiasedRpsConfig& config);

/// Orthonormal chart of the simplex tangent plane centred at the barycentre:
/// e1 = (1, -1, 0) / sqrt 2, e2 = (1, 1, -2) / sqrt 6.
std::pair<double, double> chart(std::span<const double> x);

struct Orientation {
  bool oscillatory_below = true;  ///< cycles exist for kappa < kappa_c
  double growth_rate_below = 0.0; ///< Re(lambda) at kappa_c - probe
  double growth_rate_above = 0.0;
  double frequency = 0.0;         ///< Im(lambda) at kappa_c
};

/// Linearizes the simulated family at the barycentre on both sides of kappa_c.
Orientation orient(double mu, double mutation = 0.02, double probe = 1e-3);

struct CycleMeasurement {
  double amplitude = 0.0;         ///< peak chart radius after the transient
  double min_radius = 0.0;
  std::optional<double> period;   ///< mean spacing of upward e1 zero crossings
  bool converged_to_point = false;
  bool boundary_escape = false;
  std::optional<double> decay_rate;  ///< -slope of ln r when the orbit decays
};

struct MeasureOptions {
  double step = 0.05;
  double start_radius = 0.05;
  double point_tolerance = 1e-6;
};

CycleMeasurement measure_limit_cycle(const BiasedRpsConfig& config, double horizon,
                                     double transient_cut, MeasureOptions options = {});

struct AmplitudeScaling {
  Orientation orientation;
  std::vector<double> offsets;
  std::vector<double> kappas;
  std::vector<CycleMeasurement> cycles;
  double exponent = 0.0;  ///< log-log slope of amplitude against offset
};

AmplitudeScaling amplitude_scaling(double mu, std::span<const double> offsets, double horizon,
                                   double transient_cut, double mutation = 0.02,
                                   MeasureOptions options = {});

struct SweepRow {
  double mu = 0.0;
  double kappa = 0.0;
  double kappa_c = 0.0;
  double amplitude_predicted = 0.0;
  double amplitude_measured = 0.0;
  std::optional<double> period;
};

std::vector<SweepRow> to_rows(const AmplitudeScaling& scaling, double mu);
/// `mu,kappa,kappa_c,amplitude_predicted,amplitude_measured,period`
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

}  // namespace tse::hopf
