#include <cmath>
#include <ostream>
#include <string>

#include "tse/dynamics.hpp"
#include "tse/kernels.hpp"

namespace tse::dynamics {

double mean_fitness(const PopulationState& state, const FitnessModel& model) {
  if (state.size() != model.dimension())
    throw ConfigError("state dimension does not match fitness model");
  const auto f = model.evaluate(state.shares());
  return kernels::dot(state.shares(), f);
}

double replicator_velocity(std::span<const double> x, const FitnessModel& model,
                           std::span<double> velocity) {
  std::vector<double> f(x.size());
  model.evaluate(x, f);
  return kernels::replicator_field(x, f, velocity);
}

namespace {

bool all_finite(std::span<const double> v) {
  for (double d : v)
    if (!std::isfinite(d)) return false;
  return true;
}

struct Rk4 {
  explicit Rk4(std::size_t n) : k1(n), k2(n), k3(n), k4(n), tmp(n) {}

  template <class Field>
  void step(std::span<double> x, double h, Field&& field, double t) {
    const auto check = [t](std::span<const double> v) {
      if (!all_finite(v))
        throw NumericalError("non-finite fitness during integration at t = " + format_double(t));
    };
    const auto& kt = kernels::active();
    const std::size_t n = x.size();
    field(std::span<const double>(x), std::span<double>(k1));
    check(k1);
    kt.axpy(x.data(), 0.5 * h, k1.data(), tmp.data(), n);
    field(std::span<const double>(tmp), std::span<double>(k2));
    check(k2);
    kt.axpy(x.data(), 0.5 * h, k2.data(), tmp.data(), n);
    field(std::span<const double>(tmp), std::span<double>(k3));
    check(k3);
    kt.axpy(x.data(), h, k3.data(), tmp.data(), n);
    field(std::span<const double>(tmp), std::span<double>(k4));
    check(k4);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  std::vector<double> k1, k2, k3, k4, tmp;
};

template <class Field>
Trajectory run_rk4(std::vector<double> x, Field&& field, double horizon, double step,
                   double threshold, IntegrationOptions options) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("integration step must be > 0");
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw ConfigError("integration horizon must be >= 0");
  if (options.emit_every == 0) options.emit_every = 1;

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x);

  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  Rk4 rk(x.size());
  double t = 0.0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double h = (s == steps) ? horizon - t : step;
    rk.step(x, h, field, t);
    try {
      renormalize_simplex(x, threshold);
    } catch (const NumericalError&) {
      throw NumericalError("state left the simplex during integration at t = " +
                           format_double(t));
    }
    t = (s == steps) ? horizon : static_cast<double>(s) * step;
    if (s % options.emit_every == 0 || s == steps) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }
  return traj;
}

}  // namespace

Trajectory integrate_replicator(const PopulationState& state, const FitnessModel& model,
                                double horizon, double step, IntegrationOptions options) {
  if (state.size() != model.dimension())
    throw ConfigError("state dimension does not match fitness model");
  std::vector<double> f(model.dimension());
  auto field = [&](std::span<const double> x, std::span<double> dx) {
    model.evaluate(x, f);
    kernels::replicator_field(x, f, dx);
  };
  std::vector<double> x0(state.shares().begin(), state.shares().end());
  return run_rk4(std::move(x0), field, horizon, step, state.extinction_threshold(), options);
}

Trajectory integrate_field(std::vector<double> x0, const VectorField& field, double horizon,
                           double step, double extinction_threshold,
                           IntegrationOptions options) {
  renormalize_simplex(x0, extinction_threshold);
  return run_rk4(std::move(x0), field, horizon, step, extinction_threshold, options);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const FitnessModel& model) {
  const std::size_t n = model.dimension();
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << ",mean_fitness,variance,externality\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const PopulationState s(traj.states[k], 0.0);
    const auto terms = price_decomposition(s, model);
    out << format_double(traj.times[k]);
    for (double v : traj.states[k]) out << ',' << format_double(v);
    out << ',' << format_double(terms.mean_fitness) << ',' << format_double(terms.variance)
        << ',' << format_double(terms.externality) << '\n';
  }
}

}  // namespace tse::dynamics
