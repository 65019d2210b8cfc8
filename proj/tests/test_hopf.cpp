#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <sstream>

#include "tse/hopf.hpp"

using namespace tse;
using namespace tse::hopf;
using hp = boost::multiprecision::cpp_bin_float_50;

namespace {

// Direct formulas evaluated in 50-digit arithmetic, cancellation included.
double hp_kappa_c(double mu) {
  const hp m(mu);
  return static_cast<double>((1 - sqrt(1 - 3 * m)) / (3 * m) * (1 - m));
}

double hp_l1(double mu) {
  const hp m(mu);
  return static_cast<double>(-(sqrt(hp(3)) / 8) * (1 - 3 * m) / ((1 - m) * (1 - m)));
}

}  // namespace

TEST_CASE("biased RPS payoff matrix") {
  CHECK(biased_rps_matrix(0.0) == Matrix{{0, -1, 1}, {1, 0, -1}, {-1, 1, 0}});
  const auto m = biased_rps_matrix(0.5);
  CHECK(m(0, 2) == 1.5);
  CHECK(m(1, 0) == 1.5);
  CHECK(m(2, 1) == 1.5);
  for (double k : {-0.3, 0.0, 0.5, 2.0}) {
    const auto p = biased_rps_matrix(k);
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(p(i, 0) + p(i, 1) + p(i, 2) == doctest::Approx(k).epsilon(1e-15));
  }
}

TEST_CASE("closed forms against high-precision evaluation") {
  for (double mu : {0.05, 0.1, 0.2, 0.3, 1e-6, 0.333}) {
    CHECK(std::abs(hopf_curve(mu) - hp_kappa_c(mu)) <= 1e-12);
    CHECK(std::abs(first_lyapunov_coefficient(mu) - hp_l1(mu)) <= 1e-12);
    CHECK(first_lyapunov_coefficient(mu) < 0.0);
  }
  CHECK(hopf_curve(1e-9) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(hopf_curve(1.0 / 3.0 - 1e-12) == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
  CHECK(hopf_curve(0.2) == doctest::Approx(0.49).epsilon(0.01));
  CHECK(first_lyapunov_coefficient(0.2) == doctest::Approx(-0.1353).epsilon(1e-3));
  CHECK(std::abs(first_lyapunov_coefficient(1.0 / 3.0 - 1e-12)) < 1e-10);
  CHECK_THROWS_AS(hopf_curve(0.0), ConfigError);
  CHECK_THROWS_AS(hopf_curve(1.0 / 3.0), ConfigError);
  CHECK_THROWS_AS(first_lyapunov_coefficient(-0.1), ConfigError);
}

TEST_CASE("predicted amplitude") {
  const double kc = hopf_curve(0.2);
  CHECK(predicted_amplitude(kc, 0.2).value == 0.0);
  CHECK(predicted_amplitude(kc, 0.2).stable_side);
  CHECK(predicted_amplitude(kc + 0.1, 0.2).stable_side);
  CHECK(amplitude_coefficient(0.2) == doctest::Approx(0.1462).epsilon(1e-3));
  CHECK(predicted_amplitude(kc - 0.01, 0.2).value == doctest::Approx(0.01462).epsilon(1e-3));
  const double a1 = predicted_amplitude(kc - 0.003, 0.2).value;
  const double a4 = predicted_amplitude(kc - 0.012, 0.2).value;
  CHECK(a4 / a1 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("simulated family orientation and linearization") {
  for (double mu : {0.05, 0.2}) {
    const auto o = orient(mu);
    CHECK(o.oscillatory_below);
    CHECK(o.growth_rate_below == doctest::Approx(1e-3 / 6).epsilon(1e-4));
    CHECK(o.growth_rate_above == doctest::Approx(-1e-3 / 6).epsilon(1e-4));
    CHECK(o.frequency > 0.0);
  }
  // The barycentre is an equilibrium of the family for every kappa.
  const auto f = biased_rps_field({0.3, 0.2, 0.02});
  std::vector<double> c(3, 1.0 / 3.0), d(3);
  f(c, d);
  for (double v : d) CHECK(std::abs(v) < 1e-15);
  CHECK_THROWS_AS(biased_rps_field({0.3, 0.5, 0.02}), ConfigError);
  CHECK_THROWS_AS(biased_rps_field({0.3, 0.2, 0.0}), ConfigError);
}

TEST_CASE("limit cycles") {
  const double mu = 0.2;
  const double kc = hopf_curve(mu);

  SUBCASE("stable side decays to the interior point") {
    const auto m = measure_limit_cycle({kc + 0.2, mu, 0.02}, 1500, 500);
    CHECK(m.converged_to_point);
    REQUIRE(m.decay_rate.has_value());
    CHECK(*m.decay_rate == doctest::Approx(0.2 / 6).epsilon(0.05));
    CHECK_FALSE(m.boundary_escape);
  }

  SUBCASE("oscillatory side sustains a cycle over a doubled horizon") {
    const auto a = measure_limit_cycle({kc - 0.02, mu, 0.02}, 4000, 3000);
    const auto b = measure_limit_cycle({kc - 0.02, mu, 0.02}, 8000, 7000);
    CHECK_FALSE(a.converged_to_point);
    CHECK(a.amplitude > 0.01);
    CHECK(b.amplitude == doctest::Approx(a.amplitude).epsilon(1e-4));
    REQUIRE(a.period.has_value());
    CHECK(*a.period == doctest::Approx(*b.period).epsilon(1e-3));
    // Near onset the period approaches 2 pi / Im(lambda).
    CHECK(*a.period == doctest::Approx(2 * M_PI / orient(mu).frequency).epsilon(0.1));
  }

  SUBCASE("square-root amplitude law") {
    const std::vector<double> offsets{0.01, 0.02, 0.04, 0.08};
    const auto s = amplitude_scaling(mu, offsets, 4000, 3000);
    CHECK(s.exponent == doctest::Approx(0.5).epsilon(0.2));
    for (std::size_t i = 1; i < s.cycles.size(); ++i)
      CHECK(s.cycles[i].amplitude > s.cycles[i - 1].amplitude);
    std::ostringstream os;
    const auto rows = to_rows(s, mu);
    write_sweep_csv(os, rows);
    CHECK(os.str().rfind("mu,kappa,kappa_c,amplitude_predicted,amplitude_measured,period\n", 0) == 0);
    CHECK(rows[0].amplitude_predicted == doctest::Approx(amplitude_coefficient(mu) * 0.1));
  }

  CHECK_THROWS_AS(measure_limit_cycle({kc, mu, 0.02}, 10, 20), ConfigError);
}
