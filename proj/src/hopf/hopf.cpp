#include "tse/hopf.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace tse::hopf {

namespace {

constexpr double kBoundary = 1e-9;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
const double kInvSqrt6 = 1.0 / std::sqrt(6.0);

void check_mu(double mu) {
  if (!(mu > 0.0 && mu < 1.0 / 3.0)) throw ConfigError("mu must lie in (0, 1/3)");
}

std::vector<double> from_chart(double u, double v) {
  const double c = 1.0 / 3.0;
  return {c + u * kInvSqrt2 + v * kInvSqrt6, c - u * kInvSqrt2 + v * kInvSqrt6,
          c - 2.0 * v * kInvSqrt6};
}

// Re and Im of the leading eigenvalue of the chart Jacobian at the barycentre.
std::pair<double, double> linear_rate(const BiasedRpsConfig& cfg) {
  const auto field = biased_rps_field(cfg);
  const double h = 1e-6;
  double j[2][2];
  for (int k = 0; k < 2; ++k) {
    std::vector<double> fp(3), fm(3);
    field(from_chart(k == 0 ? h : 0, k == 1 ? h : 0), fp);
    field(from_chart(k == 0 ? -h : 0, k == 1 ? -h : 0), fm);
    std::vector<double> d(3);
    for (int i = 0; i < 3; ++i) d[i] = (fp[i] - fm[i]) / (2 * h);
    const auto [a, b] = chart(std::vector<double>{d[0] + 1.0 / 3.0, d[1] + 1.0 / 3.0, d[2] + 1.0 / 3.0});
    j[0][k] = a;
    j[1][k] = b;
  }
  const double tr = j[0][0] + j[1][1];
  const double det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
  const double disc = tr * tr / 4.0 - det;
  if (disc >= 0.0) return {tr / 2.0 + std::sqrt(disc), 0.0};
  return {tr / 2.0, std::sqrt(-disc)};
}

}  // namespace

void BiasedRpsConfig::validate() const {
  check_mu(mu);
  if (!std::isfinite(kappa)) throw ConfigError("kappa must be finite");
  if (!(mutation > 0.0 && mutation < 1.0 / 3.0)) throw ConfigError("mutation must lie in (0, 1/3)");
}

Matrix biased_rps_matrix(double kappa) {
  const double w = 1.0 + kappa;
  return Matrix{{0, -1, w}, {w, 0, -1}, {-1, w, 0}};
}

double hopf_curve(double mu) {
  check_mu(mu);
  // (1 - sqrt(1 - 3mu)) / (3mu) rewritten without cancellation.
  return (1.0 - mu) / (1.0 + std::sqrt(1.0 - 3.0 * mu));
}

double first_lyapunov_coefficient(double mu) {
  check_mu(mu);
  return -(std::sqrt(3.0) / 8.0) * (1.0 - 3.0 * mu) / ((1.0 - mu) * (1.0 - mu));
}

double amplitude_coefficient(double mu) {
  check_mu(mu);
  return std::sqrt((1.0 - 3.0 * mu) / (54.0 * std::sqrt(3.0) * mu));
}

PredictedAmplitude predicted_amplitude(double kappa, double mu) {
  const double kc = hopf_curve(mu);
  if (kappa >= kc) return {0.0, true};
  return {amplitude_coefficient(mu) * std::sqrt(kc - kappa), false};
}

dynamics::VectorField biased_rps_field(const BiasedRpsConfig& config) {
  config.validate();
  const double shifted = config.kappa - hopf_curve(config.mu) - 18.0 * config.mutation;
  const Matrix pi = biased_rps_matrix(shifted);
  const double m = config.mutation;
  return [pi, m](std::span<const double> x, std::span<double> dx) {
    double f[3];
    double mean = 0.0;
    for (int i = 0; i < 3; ++i) {
      f[i] = pi(i, 0) * x[0] + pi(i, 1) * x[1] + pi(i, 2) * x[2];
      mean += x[i] * f[i];
    }
    for (int i = 0; i < 3; ++i) dx[i] = x[i] * (f[i] - mean) + m * (1.0 - 3.0 * x[i]);
  };
}

std::pair<double, double> chart(std::span<const double> x) {
  const double c = 1.0 / 3.0;
  const double d0 = x[0] - c, d1 = x[1] - c, d2 = x[2] - c;
  return {(d0 - d1) * kInvSqrt2, (d0 + d1 - 2.0 * d2) * kInvSqrt6};
}

Orientation orient(double mu, double mutation, double probe) {
  const double kc = hopf_curve(mu);
  Orientation o;
  o.growth_rate_below = linear_rate({kc - probe, mu, mutation}).first;
  o.growth_rate_above = linear_rate({kc + probe, mu, mutation}).first;
  o.frequency = linear_rate({kc, mu, mutation}).second;
  if ((o.growth_rate_below > 0.0) == (o.growth_rate_above > 0.0))
    throw NumericalError("no sign change of the linear growth rate across kappa_c");
  o.oscillatory_below = o.growth_rate_below > 0.0;
  return o;
}

CycleMeasurement measure_limit_cycle(const BiasedRpsConfig& config, double horizon,
                                     double transient_cut, MeasureOptions options) {
  config.validate();
  if (!(horizon > transient_cut) || transient_cut < 0.0)
    throw ConfigError("horizon must exceed the transient cut");
  const auto field = biased_rps_field(config);
  const auto traj =
      dynamics::integrate_field(from_chart(options.start_radius, 0.0), field, horizon, options.step);

  CycleMeasurement m;
  m.min_radius = INFINITY;
  double prev_u = NAN, prev_t = NAN;
  std::vector<double> crossings, ts, logs;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto& x = traj.states[k];
    if (*std::min_element(x.begin(), x.end()) < kBoundary) m.boundary_escape = true;
    const double t = traj.times[k];
    if (t < transient_cut) continue;
    const auto [u, v] = chart(x);
    const double r = std::hypot(u, v);
    m.amplitude = std::max(m.amplitude, r);
    m.min_radius = std::min(m.min_radius, r);
    if (r > 0.0) {
      ts.push_back(t);
      logs.push_back(std::log(r));
    }
    if (prev_u < 0.0 && u >= 0.0) crossings.push_back(prev_t + (t - prev_t) * (-prev_u) / (u - prev_u));
    prev_u = u;
    prev_t = t;
  }
  m.converged_to_point = m.amplitude < options.point_tolerance;
  if (crossings.size() >= 2)
    m.period = (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);

  if (ts.size() >= 2 && logs.back() < logs.front()) {
    const double n = static_cast<double>(ts.size());
    double mt = 0.0, ml = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      mt += ts[i] / n;
      ml += logs[i] / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      sxy += (ts[i] - mt) * (logs[i] - ml);
      sxx += (ts[i] - mt) * (ts[i] - mt);
    }
    if (sxx > 0.0 && sxy < 0.0) m.decay_rate = -sxy / sxx;
  }
  return m;
}

AmplitudeScaling amplitude_scaling(double mu, std::span<const double> offsets, double horizon,
                                   double transient_cut, double mutation, MeasureOptions options) {
  if (offsets.size() < 2) throw ConfigError("amplitude scaling needs at least 2 offsets");
  AmplitudeScaling s;
  s.orientation = orient(mu, mutation);
  const double kc = hopf_curve(mu);
  std::vector<double> lx, ly;
  for (double d : offsets) {
    if (!(d > 0.0)) throw ConfigError("offsets must be positive");
    const double kappa = s.orientation.oscillatory_below ? kc - d : kc + d;
    auto c = measure_limit_cycle({kappa, mu, mutation}, horizon, transient_cut, options);
    if (c.boundary_escape) throw NumericalError("limit cycle reached the simplex boundary");
    if (c.converged_to_point)
      throw NumericalError("no limit cycle at offset " + format_double(d));
    s.offsets.push_back(d);
    s.kappas.push_back(kappa);
    lx.push_back(std::log(d));
    ly.push_back(std::log(c.amplitude));
    s.cycles.push_back(c);
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  s.exponent = sxy / sxx;
  return s;
}

std::vector<SweepRow> to_rows(const AmplitudeScaling& scaling, double mu) {
  std::vector<SweepRow> rows;
  const double kc = hopf_curve(mu);
  for (std::size_t i = 0; i < scaling.kappas.size(); ++i) {
    const double k = scaling.kappas[i];
    rows.push_back({mu, k, kc, predicted_amplitude(k, mu).value, scaling.cycles[i].amplitude,
                    scaling.cycles[i].period});
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "mu,kappa,kappa_c,amplitude_predicted,amplitude_measured,period\n";
  for (const auto& r : rows)
    out << format_double(r.mu) << ',' << format_double(r.kappa) << ',' << format_double(r.kappa_c)
        << ',' << format_double(r.amplitude_predicted) << ',' << format_double(r.amplitude_measured)
        << ',' << (r.period ? format_double(*r.period) : std::string("nan")) << '\n';
}

}  // namespace tse::hopf
