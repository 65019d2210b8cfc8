#include "tse/pdmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "tse/rng.hpp"

namespace tse::pdmp {

namespace {

constexpr double kEventTimeTol = 1e-10;
constexpr double kInf = std::numeric_limits<double>::infinity();

class Flow {
public:
  explicit Flow(const FitnessModel& model)
      : model_(model), k1_(model.dimension()), k2_(k1_), k3_(k1_), k4_(k1_), tmp_(k1_) {}

  std::vector<double> step(const std::vector<double>& x, double h) {
    const std::size_t n = x.size();
    dynamics::replicator_velocity(x, model_, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
    dynamics::replicator_velocity(tmp_, model_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
    dynamics::replicator_velocity(tmp_, model_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
    dynamics::replicator_velocity(tmp_, model_, k4_);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = x[i] + (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
      if (!std::isfinite(y[i])) throw NumericalError("PDMP flow produced a non-finite share");
    }
    renormalize_simplex(y, 0.0);
    return y;
  }

private:
  const FitnessModel& model_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

std::size_t count_active(const std::vector<double>& x) {
  return static_cast<std::size_t>(std::count_if(x.begin(), x.end(), [](double v) { return v > 0.0; }));
}

double min_active(const std::vector<double>& x) {
  double m = kInf;
  for (double v : x)
    if (v > 0.0) m = std::min(m, v);
  return m;
}

}  // namespace

void PdmpConfig::validate() const {
  const std::size_t n = model.dimension();
  if (initial_state.size() != n) throw ConfigError("initial state must cover the whole pool");
  PopulationState check(initial_state, 0.0);
  for (double v : initial_state)
    if (v > 0.0 && v < exit_threshold)
      throw ConfigError("initial active shares must be at least the extinction threshold");
  if (count_active(initial_state) == 0) throw ConfigError("initial active set is empty");
  for (std::size_t s : entry_order)
    if (s >= n) throw ConfigError("entry order names a strategy outside the pool");
  if (!(innovation_rate >= 0.0)) throw ConfigError("innovation rate must be >= 0");
  if (!(entry_mass > 0.0 && entry_mass < 1.0)) throw ConfigError("entry mass must lie in (0, 1)");
  if (!(exit_threshold > 0.0 && exit_threshold < entry_mass))
    throw ConfigError("extinction threshold must lie in (0, entry mass)");
  if (!(foster_c > 0.0)) throw ConfigError("foster constant must be > 0");
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (!(step > 0.0) || !(sample_dt > 0.0)) throw ConfigError("step and sample interval must be > 0");
}

const char* to_string(EventKind k) {
  return k == EventKind::innovation ? "innovation" : "extinction";
}

double foster_lyapunov(double mean_fitness, std::size_t active_set_size, double c) {
  return -mean_fitness + c * static_cast<double>(active_set_size);
}

double foster_lyapunov(std::span<const double> state, const FitnessModel& model,
                       std::size_t active_set_size, double c) {
  const auto f = model.evaluate(state);
  double mean = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) mean += state[i] * f[i];
  return foster_lyapunov(mean, active_set_size, c);
}

PdmpResult pdmp_simulate(const PdmpConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.model.dimension();
  std::vector<double> x = cfg.initial_state;
  renormalize_simplex(x, 0.0);

  std::vector<std::size_t> order = cfg.entry_order;
  if (order.empty())
    for (std::size_t s = 0; s < n; ++s)
      if (x[s] == 0.0) order.push_back(s);

  PdmpResult r;
  r.horizon = cfg.horizon;
  r.initial_active = count_active(x);
  Flow flow(cfg.model);
  Stream clock(cfg.seed, 0, StreamPurpose::innovation);
  double next_innovation = cfg.innovation_rate > 0.0 ? clock.exponential(cfg.innovation_rate) : kInf;
  std::size_t cursor = 0;

  auto record = [&](double t) {
    r.trajectory.times.push_back(t);
    r.trajectory.states.push_back(x);
    const std::size_t s = count_active(x);
    r.active_set_size.push_back(s);
    r.foster.push_back(foster_lyapunov(x, cfg.model, s, cfg.foster_c));
  };

  auto remove_below_threshold = [&](double t, std::size_t keep) {
    for (std::size_t s = 0; s < n; ++s) {
      if (s != keep && x[s] > 0.0 && x[s] < cfg.exit_threshold && count_active(x) > 1) {
        PdmpEvent e{t, EventKind::extinction, s, x, {}};
        x[s] = 0.0;
        renormalize_simplex(x, 0.0);
        e.post_state = x;
        r.events.push_back(std::move(e));
        ++r.extinctions;
      }
    }
  };

  auto innovate = [&](double t) {
    // Entry order first; with recycling, further passes over the whole pool
    // let extinct strategies return.
    for (std::size_t tries = 0; tries < order.size() + n; ++tries) {
      if (cursor >= order.size() && !cfg.recycle) break;
      const std::size_t s = cursor < order.size() ? order[cursor] : (cursor - order.size()) % n;
      ++cursor;
      if (x[s] > 0.0) continue;
      PdmpEvent e{t, EventKind::innovation, s, x, {}};
      for (double& v : x) v *= 1.0 - cfg.entry_mass;
      x[s] = cfg.entry_mass;
      e.post_state = x;
      r.events.push_back(std::move(e));
      ++r.innovations;
      // Dilution can push a small resident under the threshold.
      remove_below_threshold(t, s);
      return;
    }
    if (!cfg.recycle) {
      r.pool_exhausted = true;
      next_innovation = kInf;
    }
    // Otherwise every pooled strategy is active and this arrival is lost.
  };

  double t = 0.0;
  std::size_t sample_index = 0;
  record(0.0);
  while (t < cfg.horizon) {
    const double next_sample =
        std::min(static_cast<double>(sample_index + 1) * cfg.sample_dt, cfg.horizon);
    const double stop = std::min(next_sample, std::min(next_innovation, cfg.horizon));

    while (t < stop) {
      double h = stop - t;
      if (h > cfg.step * (1.0 + 1e-9)) h = cfg.step;
      auto y = flow.step(x, h);
      if (min_active(y) >= cfg.exit_threshold || count_active(y) <= 1) {
        x = std::move(y);
        t = h == stop - t ? stop : t + h;
        continue;
      }
      // Locate the first crossing inside the step by bisection on the step length.
      double lo = 0.0, hi = h;
      while (hi - lo > kEventTimeTol) {
        const double mid = 0.5 * (lo + hi);
        (min_active(flow.step(x, mid)) < cfg.exit_threshold ? hi : lo) = mid;
      }
      x = flow.step(x, hi);
      t += hi;
      remove_below_threshold(t, n);
    }
    t = stop;
    if (stop == next_innovation) {
      innovate(t);
      if (next_innovation == stop) next_innovation = t + clock.exponential(cfg.innovation_rate);
    }
    if (stop == next_sample) {
      record(t);
      ++sample_index;
    }
  }
  return r;
}

double active_set_time_average(const PdmpResult& r, double from, double to) {
  if (!(to > from)) throw ConfigError("time-average window must have positive length");
  double acc = 0.0;
  double t = 0.0;
  auto size = static_cast<double>(r.initial_active);
  auto add = [&](double until) {
    const double a = std::max(t, from), b = std::min(until, to);
    if (b > a) acc += size * (b - a);
  };
  for (const auto& e : r.events) {
    add(e.time);
    t = e.time;
    size += e.kind == EventKind::innovation ? 1.0 : -1.0;
  }
  add(to);
  return acc / (to - from);
}

StationaryReport stationary_active_set(PdmpConfig config, double horizon_long, double burn_in) {
  if (!(horizon_long > burn_in) || burn_in < 0.0)
    throw ConfigError("horizon must exceed the burn-in");
  config.horizon = horizon_long;
  config.sample_dt = std::max(config.sample_dt, horizon_long / 2000.0);
  StationaryReport rep;
  rep.run = pdmp_simulate(config);
  const auto& run = rep.run;
  rep.mean_active = active_set_time_average(run, burn_in, horizon_long);

  constexpr int kBatches = 10;
  const double width = (horizon_long - burn_in) / kBatches;
  double sum = 0.0, sq = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    const double m = active_set_time_average(run, burn_in + b * width, burn_in + (b + 1) * width);
    sum += m;
    sq += m * m;
  }
  const double mean = sum / kBatches;
  rep.standard_error = std::sqrt(std::max(0.0, sq / kBatches - mean * mean) / (kBatches - 1));

  // Extinction rate in the upper region |S| > mean, where the drift argument
  // needs exits to outpace entries.
  double exposure = 0.0, t = 0.0;
  std::size_t exits = 0;
  auto size = static_cast<double>(run.initial_active);
  for (const auto& e : run.events) {
    if (size > rep.mean_active) {
      exposure += std::max(0.0, e.time - std::max(t, burn_in));
      if (e.kind == EventKind::extinction && e.time >= burn_in) ++exits;
    }
    t = e.time;
    size += e.kind == EventKind::innovation ? 1.0 : -1.0;
  }
  if (size > rep.mean_active) exposure += horizon_long - std::max(t, burn_in);
  rep.exit_hazard = exposure > 0.0 ? static_cast<double>(exits) / exposure : 0.0;
  rep.innovation_rate = static_cast<double>(run.innovations) / horizon_long;
  rep.eeb_satisfied = run.innovations == 0 || rep.exit_hazard > config.innovation_rate;
  return rep;
}

void write_events_csv(std::ostream& out, const PdmpResult& r) {
  const std::size_t n = r.trajectory.states.empty() ? 0 : r.trajectory.states.front().size();
  out << "time,kind,strategy";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << '\n';
  for (const auto& e : r.events) {
    out << format_double(e.time) << ',' << to_string(e.kind) << ',' << e.strategy;
    for (double v : e.post_state) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const PdmpResult& r, const FitnessModel& model) {
  const std::size_t n = model.dimension();
  out << "t";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << ",mean_fitness,variance,externality,active_set_size,foster_value\n";
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    const auto& x = r.trajectory.states[k];
    const auto p = dynamics::price_decomposition(PopulationState(x, 0.0), model);
    out << format_double(r.trajectory.times[k]);
    for (double v : x) out << ',' << format_double(v);
    out << ',' << format_double(p.mean_fitness) << ',' << format_double(p.variance) << ','
        << format_double(p.externality) << ',' << r.active_set_size[k] << ','
        << format_double(r.foster[k]) << '\n';
  }
}

}  // namespace tse::pdmp
