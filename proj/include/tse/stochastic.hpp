#pragma once

// Noise-driven simulation: Euler-Maruyama escape times on scalar potentials and
// on the simplex, Kramers regression and long-run occupancy. Increments are
// drift * dt + sqrt(sigma * dt) * N(0, 1), so exit times scale as exp(W / sigma)
// where W is the quasi-potential barrier (twice the potential height).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tse/dynamics.hpp"
#include "tse/kernels.hpp"

namespace tse::stochastic {

struct NoiseConfig {
  double sigma = 0.1;
  std::uint64_t seed = 0;
  double step = 0.01;
  std::size_t runs = 100;
  std::uint64_t max_steps = 10'000'000;  ///< censoring horizon per run
  unsigned threads = 1;

  void validate() const;
};

double protection_bits(double barrier, double sigma);

struct Persistence {
  double value = 0.0;
  bool saturated = false;  ///< bits > 700; value clamped to exp(700) / rate
};

/// exp(bits) / base_rate.
Persistence expected_persistence(double bits, double base_rate);

struct EscapeSample {
  std::size_t run = 0;
  double time = 0.0;
  bool censored = false;
};

struct EscapeSet {
  double sigma = 0.0;
  std::vector<EscapeSample> samples;  ///< ordered by run index
  std::size_t censored = 0;
  /// Mean over uncensored runs. When every run is censored this holds the
  /// censoring time and lower_bound_only is set.
  std::optional<double> mean;
  bool lower_bound_only = false;

  std::size_t uncensored() const noexcept { return samples.size() - censored; }
};

/// Orders samples by run and recomputes the summary.
EscapeSet summarize(double sigma, std::vector<EscapeSample> samples, double censor_time);
/// Pools two batches of the same sigma; the result does not depend on argument order.
EscapeSet merge(const EscapeSet& a, const EscapeSet& b, double censor_time);

using ScalarDrift = std::function<double(double)>;
using ScalarBoundary = std::function<bool(double)>;
using SimplexBoundary = std::function<bool(std::span<const double>)>;

EscapeSet simulate_escape(const ScalarDrift& drift, double x0, const ScalarBoundary& boundary,
                          const NoiseConfig& noise);

/// Piecewise double well with quasi-potential barriers W_left (escape from -1)
/// and W_right (escape from +1): potential heights are W / 2.
kernels::QuarticWell double_well(double barrier_left, double barrier_right);
double well_drift(const kernels::QuarticWell& well, double x);
/// Batched fast path through the SIMD kernel. The basin boundary is x >= 0
/// when starting left of zero and x <= 0 otherwise. Bitwise identical to the
/// generic overload driven by well_drift.
EscapeSet simulate_escape(const kernels::QuarticWell& well, double x0, const NoiseConfig& noise);

/// Euler-Maruyama on the simplex with isotropic tangent noise (increments
/// projected onto sum-zero vectors), then clamp and renormalize.
EscapeSet simulate_escape_simplex(const dynamics::VectorField& field, std::vector<double> x0,
                                  const SimplexBoundary& boundary, const NoiseConfig& noise);

using EscapeRunner = std::function<EscapeSet(const NoiseConfig&)>;

struct KramersFit {
  std::vector<EscapeSet> sets;
  std::vector<double> sigmas;
  std::vector<double> mean_times;
  double slope = 0.0;  ///< estimate of the barrier W
  double intercept = 0.0;
  double r_squared = 0.0;
  std::optional<double> barrier_reference;
  std::vector<double> protection_bits;  ///< barrier_reference / sigma when supplied
};

/// Regresses ln(mean escape) on 1/sigma. Each sigma needs at least half of
/// its runs uncensored, otherwise NumericalError.
KramersFit kramers_scaling(const EscapeRunner& runner, std::span<const double> sigmas,
                           const NoiseConfig& base,
                           std::optional<double> barrier_reference = std::nullopt);
KramersFit kramers_scaling(const kernels::QuarticWell& well, std::span<const double> sigmas,
                           const NoiseConfig& base);

/// `sigma,run,escape_time,censored`
void write_escape_csv(std::ostream& out, std::span<const EscapeSet> sets);
void write_kramers_summary(std::ostream& out, const KramersFit& fit);

struct OccupancyConfig {
  std::uint64_t seed = 0;
  double step = 0.01;
  std::size_t walkers = 32;  ///< half start at -1, half at +1
  double horizon = 20000.0;
  double burn_in = 1000.0;
};

struct Occupancy {
  double sigma = 0.0;
  double left = 0.0;   ///< fraction of post-burn-in time with x < 0
  double right = 0.0;
  std::size_t transitions = 0;
};

std::vector<Occupancy> stationary_concentration(const kernels::QuarticWell& well,
                                                std::span<const double> sigmas,
                                                const OccupancyConfig& config);

}  // namespace tse::stochastic
