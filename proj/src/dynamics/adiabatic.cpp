#include <algorithm>
#include <cmath>

#include "tse/dynamics.hpp"
#include "tse/kernels.hpp"

namespace tse::dynamics {

namespace {

double max_abs_velocity(std::span<const double> x, const FitnessModel& model) {
  std::vector<double> v(x.size());
  replicator_velocity(x, model, v);
  double m = 0.0;
  for (double d : v) m = std::max(m, std::abs(d));
  return m;
}

std::vector<double> settle(std::vector<double> x, const FitnessModel& model) {
  constexpr double chunk = 10.0;
  constexpr double max_time = 5000.0;
  for (double t = 0.0; t < max_time; t += chunk) {
    const auto traj = integrate_replicator(PopulationState(x, 0.0), model, chunk, 0.05,
                                           IntegrationOptions{1000000});
    x = traj.states.back();
    if (max_abs_velocity(x, model) < 1e-13) return x;
  }
  throw NumericalError("equilibrium tracker did not converge (no attracting fixed point)");
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

std::vector<double> tracked_equilibrium(const FitnessModel& model, std::span<const double> guess) {
  const std::size_t n = model.dimension();
  std::vector<std::vector<double>> starts;
  if (!guess.empty()) {
    if (guess.size() != n) throw ConfigError("equilibrium guess has wrong dimension");
    starts.emplace_back(guess.begin(), guess.end());
  }
  starts.emplace_back(n, 1.0 / static_cast<double>(n));
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> s(n, 0.1 / static_cast<double>(n - 1));
      s[i] = 0.9;
      starts.push_back(std::move(s));
    }
  }
  std::vector<double> first;
  for (const auto& s : starts) {
    auto eq = settle(s, model);
    if (first.empty()) {
      first = std::move(eq);
      for (double v : first)
        if (v < 1e-8)
          throw NumericalError("equilibrium tracker lost uniqueness: attractor on the boundary");
    } else if (sup_distance(first, eq) > 1e-6) {
      throw NumericalError("equilibrium tracker lost uniqueness: starts reach distinct attractors");
    }
  }
  return first;
}

AdiabaticReport adiabatic_tracking_check(const AdiabaticConfig& cfg) {
  if (!cfg.family) throw ConfigError("adiabatic check needs a model family");
  if (!(cfg.step > 0.0)) throw ConfigError("integration step must be > 0");
  if (!(cfg.epsilon0 >= 0.0)) throw ConfigError("drift speed must be >= 0");
  if (!(cfg.lambda0 > 0.0)) throw ConfigError("contraction estimate must be > 0");

  constexpr std::size_t kSamples = 100;
  const double span_theta = cfg.theta_end - cfg.theta_start;
  AdiabaticReport rep;

  std::vector<std::vector<double>> eq(kSamples + 1);
  eq[0] = tracked_equilibrium(cfg.family(cfg.theta_start));
  for (std::size_t k = 1; k <= kSamples; ++k) {
    const double th = cfg.theta_start + span_theta * static_cast<double>(k) / kSamples;
    eq[k] = tracked_equilibrium(cfg.family(th), eq[k - 1]);
  }
  double sensitivity = 0.0;
  for (std::size_t k = 1; k <= kSamples; ++k)
    sensitivity = std::max(sensitivity, sup_distance(eq[k], eq[k - 1]) /
                                            std::abs(span_theta / kSamples));

  if (cfg.epsilon0 == 0.0) {
    const auto model = cfg.family(cfg.theta_start);
    const auto traj = integrate_replicator(PopulationState(eq[0], 0.0), model,
                                           cfg.frozen_horizon, cfg.step);
    double err = 0.0;
    for (const auto& s : traj.states) err = std::max(err, sup_distance(s, eq[0]));
    rep.epsilons = {0.0};
    rep.max_errors = {err};
    return rep;
  }
  if (span_theta == 0.0) throw ConfigError("parameter sweep is empty");

  rep.predicted_error = cfg.epsilon0 * sensitivity / cfg.lambda0;
  const std::size_t n = eq[0].size();
  for (double scale : {1.0, 0.5, 0.25}) {
    const double eps = cfg.epsilon0 * scale;
    const double duration = std::abs(span_theta) / eps;
    const auto per_sample = static_cast<std::size_t>(
        std::ceil(duration / (cfg.step * static_cast<double>(kSamples))));
    const std::size_t steps = per_sample * kSamples;
    const double h = duration / static_cast<double>(steps);
    const double dtheta = span_theta / duration;

    std::vector<double> x = eq[0], k1(n), k2(n), k3(n), k4(n), tmp(n);
    const auto field = [&](double t, std::span<const double> y, std::span<double> dy) {
      replicator_velocity(y, cfg.family(cfg.theta_start + dtheta * t), dy);
    };
    double err = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
      const double t = h * static_cast<double>(s);
      field(t, x, k1);
      kernels::axpy(x, 0.5 * h, k1, tmp);
      field(t + 0.5 * h, tmp, k2);
      kernels::axpy(x, 0.5 * h, k2, tmp);
      field(t + 0.5 * h, tmp, k3);
      kernels::axpy(x, h, k3, tmp);
      field(t + h, tmp, k4);
      for (std::size_t i = 0; i < n; ++i)
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      renormalize_simplex(x, kDefaultExtinctionThreshold);
      if ((s + 1) % per_sample == 0)
        err = std::max(err, sup_distance(x, eq[(s + 1) / per_sample]));
    }
    rep.epsilons.push_back(eps);
    rep.max_errors.push_back(err);
  }

  double mx = 0.0, my = 0.0;
  const auto m = static_cast<double>(rep.epsilons.size());
  for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
    mx += std::log(rep.epsilons[i]) / m;
    my += std::log(rep.max_errors[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < rep.epsilons.size(); ++i) {
    const double dx = std::log(rep.epsilons[i]) - mx;
    sxy += dx * (std::log(rep.max_errors[i]) - my);
    sxx += dx * dx;
  }
  rep.scaling_slope = sxy / sxx;
  return rep;
}

}  // namespace tse::dynamics
