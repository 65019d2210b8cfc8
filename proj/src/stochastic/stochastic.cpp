#include "tse/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <thread>

#include "tse/core.hpp"
#include "tse/population.hpp"
#include "tse/rng.hpp"

namespace tse::stochastic {

namespace {

constexpr double kSaturationBits = 700.0;

// Runs fn(begin, end) over contiguous slices of [0, n). Each run owns its own
// stream, so the slicing never changes results.
template <class Fn>
void for_each_slice(std::size_t n, unsigned threads, Fn fn) {
  const std::size_t t = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (t == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + t - 1) / t;
  for (std::size_t b = 0; b < n; b += chunk) pool.emplace_back(fn, b, std::min(n, b + chunk));
}

double censor_time(const NoiseConfig& c) { return static_cast<double>(c.max_steps) * c.step; }

}  // namespace

void NoiseConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("noise sigma must be > 0");
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("noise step must be > 0");
  if (runs == 0) throw ConfigError("noise runs must be >= 1");
  if (max_steps == 0) throw ConfigError("max_steps must be >= 1");
}

double protection_bits(double barrier, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("protection bits need sigma > 0");
  if (!(barrier >= 0.0)) throw ConfigError("barrier must be >= 0");
  return barrier / sigma;
}

Persistence expected_persistence(double bits, double base_rate) {
  if (!(base_rate > 0.0)) throw ConfigError("base rate must be > 0");
  if (bits > kSaturationBits) return {std::exp(kSaturationBits) / base_rate, true};
  return {std::exp(bits) / base_rate, false};
}

EscapeSet summarize(double sigma, std::vector<EscapeSample> samples, double censor) {
  std::sort(samples.begin(), samples.end(),
            [](const EscapeSample& a, const EscapeSample& b) { return a.run < b.run; });
  EscapeSet s;
  s.sigma = sigma;
  double sum = 0.0;
  for (const auto& e : samples) {
    if (e.censored)
      ++s.censored;
    else
      sum += e.time;
  }
  s.samples = std::move(samples);
  if (s.uncensored() > 0) {
    s.mean = sum / static_cast<double>(s.uncensored());
  } else if (!s.samples.empty()) {
    s.mean = censor;
    s.lower_bound_only = true;
  }
  return s;
}

EscapeSet merge(const EscapeSet& a, const EscapeSet& b, double censor) {
  if (a.sigma != b.sigma && !a.samples.empty() && !b.samples.empty())
    throw ConfigError("cannot merge escape batches with different sigma");
  std::vector<EscapeSample> all = a.samples;
  all.insert(all.end(), b.samples.begin(), b.samples.end());
  return summarize(a.samples.empty() ? b.sigma : a.sigma, std::move(all), censor);
}

EscapeSet simulate_escape(const ScalarDrift& drift, double x0, const ScalarBoundary& boundary,
                          const NoiseConfig& noise) {
  noise.validate();
  std::vector<EscapeSample> out(noise.runs);
  const double dt = noise.step;
  const double scale = std::sqrt(noise.sigma * dt);
  const bool at_boundary = boundary(x0);
  for_each_slice(noise.runs, noise.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t r = b; r < e; ++r) {
      out[r] = {r, 0.0, false};
      if (at_boundary) continue;
      Stream rng(noise.seed, r, StreamPurpose::escape);
      double x = x0;
      std::uint64_t k = 1;
      for (; k <= noise.max_steps; ++k) {
        x = (x + drift(x) * dt) + scale * rng.normal();
        if (!std::isfinite(x)) throw NumericalError("escape path diverged");
        if (boundary(x)) break;
      }
      if (k > noise.max_steps)
        out[r] = {r, censor_time(noise), true};
      else
        out[r].time = static_cast<double>(k) * dt;
    }
  });
  return summarize(noise.sigma, std::move(out), censor_time(noise));
}

kernels::QuarticWell double_well(double barrier_left, double barrier_right) {
  if (!(barrier_left >= 0.0) || !(barrier_right >= 0.0))
    throw ConfigError("double-well barriers must be >= 0");
  return {barrier_left / 2.0, barrier_right / 2.0};
}

double well_drift(const kernels::QuarticWell& well, double x) {
  const double h = x < 0.0 ? well.h_left : well.h_right;
  return (-4.0 * h) * (x * (x * x - 1.0));
}

EscapeSet simulate_escape(const kernels::QuarticWell& well, double x0, const NoiseConfig& noise) {
  noise.validate();
  const bool from_left = x0 < 0.0;
  auto crossed = [from_left](double x) { return from_left ? x >= 0.0 : x <= 0.0; };
  std::vector<EscapeSample> out(noise.runs);
  const double dt = noise.step;
  const double scale = std::sqrt(noise.sigma * dt);
  const auto& table = kernels::active();

  for_each_slice(noise.runs, noise.threads, [&](std::size_t b, std::size_t e) {
    std::vector<std::size_t> run;
    std::vector<Stream> rng;
    std::vector<double> x, eta;
    for (std::size_t r = b; r < e; ++r) {
      if (crossed(x0)) {
        out[r] = {r, 0.0, false};
        continue;
      }
      run.push_back(r);
      rng.emplace_back(noise.seed, r, StreamPurpose::escape);
      x.push_back(x0);
    }
    eta.resize(x.size());
    std::size_t live = x.size();
    for (std::uint64_t k = 1; k <= noise.max_steps && live > 0; ++k) {
      for (std::size_t i = 0; i < live; ++i) eta[i] = scale * rng[i].normal();
      table.quartic_well_step(x.data(), eta.data(), well, dt, live);
      for (std::size_t i = 0; i < live;) {
        if (!std::isfinite(x[i])) throw NumericalError("escape path diverged");
        if (!crossed(x[i])) {
          ++i;
          continue;
        }
        out[run[i]] = {run[i], static_cast<double>(k) * dt, false};
        --live;
        std::swap(x[i], x[live]);
        std::swap(run[i], run[live]);
        std::swap(rng[i], rng[live]);
      }
    }
    for (std::size_t i = 0; i < live; ++i) out[run[i]] = {run[i], censor_time(noise), true};
  });
  return summarize(noise.sigma, std::move(out), censor_time(noise));
}

EscapeSet simulate_escape_simplex(const dynamics::VectorField& field, std::vector<double> x0,
                                  const SimplexBoundary& boundary, const NoiseConfig& noise) {
  noise.validate();
  PopulationState start(x0);
  const std::size_t n = start.size();
  std::vector<EscapeSample> out(noise.runs);
  const double dt = noise.step;
  const double scale = std::sqrt(noise.sigma * dt);
  const bool at_boundary = boundary(start.shares());

  for_each_slice(noise.runs, noise.threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> x(n), v(n), eta(n);
    for (std::size_t r = b; r < e; ++r) {
      out[r] = {r, 0.0, false};
      if (at_boundary) continue;
      Stream rng(noise.seed, r, StreamPurpose::escape);
      x.assign(start.shares().begin(), start.shares().end());
      std::uint64_t k = 1;
      for (; k <= noise.max_steps; ++k) {
        field(x, v);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          eta[i] = rng.normal();
          mean += eta[i];
        }
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
          x[i] = (x[i] + v[i] * dt) + scale * (eta[i] - mean);
        renormalize_simplex(x, start.extinction_threshold());
        if (boundary(x)) break;
      }
      if (k > noise.max_steps)
        out[r] = {r, censor_time(noise), true};
      else
        out[r].time = static_cast<double>(k) * dt;
    }
  });
  return summarize(noise.sigma, std::move(out), censor_time(noise));
}

KramersFit kramers_scaling(const EscapeRunner& runner, std::span<const double> sigmas,
                           const NoiseConfig& base, std::optional<double> barrier_reference) {
  if (sigmas.size() < 3) throw ConfigError("Kramers regression needs at least 3 sigma values");
  for (std::size_t i = 0; i < sigmas.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (sigmas[i] == sigmas[j]) throw ConfigError("Kramers sigma values must be distinct");

  KramersFit fit;
  fit.barrier_reference = barrier_reference;
  std::vector<double> xs, ys;
  for (double s : sigmas) {
    NoiseConfig cfg = base;
    cfg.sigma = s;
    auto set = runner(cfg);
    if (2 * set.uncensored() < set.samples.size())
      throw NumericalError("insufficient uncensored escapes at sigma " + format_double(s));
    if (!(*set.mean > 0.0))
      throw NumericalError("mean escape time is zero at sigma " + format_double(s));
    fit.sigmas.push_back(s);
    fit.mean_times.push_back(*set.mean);
    if (barrier_reference) fit.protection_bits.push_back(protection_bits(*barrier_reference, s));
    xs.push_back(1.0 / s);
    ys.push_back(std::log(*set.mean));
    fit.sets.push_back(std::move(set));
  }

  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / m;
    my += ys[i] / m;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

KramersFit kramers_scaling(const kernels::QuarticWell& well, std::span<const double> sigmas,
                           const NoiseConfig& base) {
  return kramers_scaling([&](const NoiseConfig& c) { return simulate_escape(well, -1.0, c); },
                         sigmas, base, 2.0 * well.h_left);
}

void write_escape_csv(std::ostream& out, std::span<const EscapeSet> sets) {
  out << "sigma,run,escape_time,censored\n";
  for (const auto& s : sets)
    for (const auto& e : s.samples)
      out << format_double(s.sigma) << ',' << e.run << ',' << format_double(e.time) << ','
          << (e.censored ? 1 : 0) << '\n';
}

void write_kramers_summary(std::ostream& out, const KramersFit& fit) {
  out << "slope=" << format_double(fit.slope) << '\n'
      << "intercept=" << format_double(fit.intercept) << '\n'
      << "r_squared=" << format_double(fit.r_squared) << '\n';
  if (fit.barrier_reference) out << "barrier_reference=" << format_double(*fit.barrier_reference) << '\n';
  for (std::size_t i = 0; i < fit.sigmas.size(); ++i) {
    const auto& s = fit.sets[i];
    out << "sigma_" << i << '=' << format_double(fit.sigmas[i]) << '\n'
        << "mean_escape_" << i << '=' << format_double(fit.mean_times[i]) << '\n'
        << "censored_" << i << '=' << s.censored << '\n';
    if (i < fit.protection_bits.size())
      out << "protection_bits_" << i << '=' << format_double(fit.protection_bits[i]) << '\n';
  }
}

std::vector<Occupancy> stationary_concentration(const kernels::QuarticWell& well,
                                                std::span<const double> sigmas,
                                                const OccupancyConfig& config) {
  if (!(config.step > 0.0) || config.walkers == 0 || !(config.horizon > config.burn_in) ||
      config.burn_in < 0.0)
    throw ConfigError("invalid occupancy configuration");
  const auto& table = kernels::active();
  const auto steps = static_cast<std::uint64_t>(std::llround(config.horizon / config.step));
  const auto burn = static_cast<std::uint64_t>(std::llround(config.burn_in / config.step));
  std::vector<Occupancy> result;
  for (double sigma : sigmas) {
    if (!(sigma > 0.0)) throw ConfigError("occupancy sigma must be > 0");
    const double scale = std::sqrt(sigma * config.step);
    const std::size_t n = config.walkers;
    std::vector<Stream> rng;
    std::vector<double> x(n), eta(n);
    for (std::size_t i = 0; i < n; ++i) {
      rng.emplace_back(config.seed, i, StreamPurpose::occupancy);
      x[i] = i % 2 == 0 ? -1.0 : 1.0;
    }
    std::vector<bool> left(n);
    for (std::size_t i = 0; i < n; ++i) left[i] = x[i] < 0.0;
    std::uint64_t left_count = 0, total = 0;
    Occupancy occ;
    occ.sigma = sigma;
    for (std::uint64_t k = 1; k <= steps; ++k) {
      for (std::size_t i = 0; i < n; ++i) eta[i] = scale * rng[i].normal();
      table.quartic_well_step(x.data(), eta.data(), well, config.step, n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) throw NumericalError("occupancy path diverged");
        const bool l = x[i] < 0.0;
        // Count a transition only once the walker reaches the far minimum,
        // so jitter around zero is not counted.
        if (l != left[i] && std::abs(x[i]) >= 1.0) {
          left[i] = l;
          if (k > burn) ++occ.transitions;
        }
        if (k > burn) {
          left_count += l ? 1 : 0;
          ++total;
        }
      }
    }
    occ.left = static_cast<double>(left_count) / static_cast<double>(total);
    occ.right = 1.0 - occ.left;
    result.push_back(occ);
  }
  return result;
}

}  // namespace tse::stochastic
