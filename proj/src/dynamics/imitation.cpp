#include <algorithm>
#include <cmath>

#include "tse/dynamics.hpp"
#include "tse/rng.hpp"

namespace tse::dynamics {

namespace {

// Largest-remainder rounding of N * x to integer counts summing to N.
std::vector<std::size_t> apportion(std::span<const double> x, std::size_t total) {
  const std::size_t n = x.size();
  std::vector<std::size_t> counts(n);
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double exact = x[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    used += counts[i];
    rem.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; used < total && k < rem.size(); ++k, ++used) ++counts[rem[k].second];
  return counts;
}

std::size_t sample_count(double horizon, double sample_dt) {
  return static_cast<std::size_t>(std::llround(horizon / sample_dt));
}

}  // namespace

ImitationRun simulate_imitation(const FitnessModel& model, std::size_t population_size,
                                const PopulationState& initial, double horizon,
                                std::uint64_t seed, double sample_dt) {
  if (population_size < 2) throw ConfigError("imitation needs population size N >= 2");
  if (!model.is_linear()) throw ConfigError("imitation process needs a linear fitness model");
  if (initial.size() != model.dimension())
    throw ConfigError("state dimension does not match fitness model");
  if (!(horizon >= 0.0) || !(sample_dt > 0.0))
    throw ConfigError("imitation horizon must be >= 0 and sample spacing > 0");

  const std::size_t n = model.dimension();
  const double big_n = static_cast<double>(population_size);
  auto counts = apportion(initial.shares(), population_size);
  std::vector<double> x(n), f(n);
  const auto refresh = [&] {
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(counts[i]) / big_n;
  };
  refresh();

  ImitationRun run;
  const std::size_t samples = sample_count(horizon, sample_dt);
  std::size_t next_sample = 0;
  const auto emit_until = [&](double t_limit) {
    while (next_sample <= samples &&
           static_cast<double>(next_sample) * sample_dt <= t_limit + 1e-12) {
      run.trajectory.times.push_back(static_cast<double>(next_sample) * sample_dt);
      run.trajectory.states.push_back(x);
      ++next_sample;
    }
  };

  Stream rng(seed, 0, StreamPurpose::imitation);
  std::vector<double> rates(n * n);
  double t = 0.0;
  while (true) {
    model.evaluate(x, f);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        const double gap = f[j] - f[k];
        const double r = (gap > 0.0) ? big_n * x[j] * x[k] * gap : 0.0;
        rates[k * n + j] = r;
        total += r;
      }
    }
    if (!(total > 0.0)) {
      std::size_t occupied = 0;
      for (auto c : counts) occupied += (c > 0);
      run.absorbed = occupied == 1;
      emit_until(horizon);
      break;
    }
    const double t_next = t + rng.exponential(total);
    if (t_next > horizon) {
      emit_until(horizon);
      break;
    }
    emit_until(t_next);
    double u = rng.uniform() * total;
    std::size_t pick = 0;
    for (; pick + 1 < rates.size(); ++pick) {
      if (u < rates[pick]) break;
      u -= rates[pick];
    }
    while (rates[pick] == 0.0 && pick > 0) --pick;
    const std::size_t from = pick / n;
    const std::size_t to = pick % n;
    --counts[from];
    ++counts[to];
    refresh();
    ++run.events;
    t = t_next;
  }
  return run;
}

double imitation_deviation(const FitnessModel& model, std::size_t population_size,
                           const PopulationState& initial, double horizon, std::uint64_t seed,
                           std::size_t replicates, double sample_dt) {
  if (replicates == 0) throw ConfigError("need at least one replicate");
  constexpr std::size_t substeps = 10;
  const auto det = integrate_replicator(initial, model, horizon, sample_dt / substeps,
                                        IntegrationOptions{substeps});
  double acc = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) {
    const auto run = simulate_imitation(model, population_size, initial, horizon,
                                        stream_seed(seed, r, StreamPurpose::imitation),
                                        sample_dt);
    double sup = 0.0;
    const std::size_t m = std::min(run.trajectory.size(), det.size());
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < initial.size(); ++j)
        sup = std::max(sup, std::abs(run.trajectory.states[k][j] - det.states[k][j]));
    acc += sup;
  }
  return acc / static_cast<double>(replicates);
}

}  // namespace tse::dynamics
