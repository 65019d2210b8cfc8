#include <doctest.h>

#include <cmath>

#include "tse/market.hpp"
#include "tse/rng.hpp"

using namespace tse;
using namespace tse::market;

namespace {

TippingParams act() { return {0.3, 0.6, 0.8, 0.2, 1.5}; }

}  // namespace

TEST_CASE("tipping indices") {
  const auto p = act();
  CHECK(myopic_slope(p) == doctest::Approx(1.125).epsilon(1e-15));
  CHECK(myopic_slope({0, 0, 0.8, 0.2, 0}) == 0.0);
  CHECK(myopic_slope({0.1, 0.2, 0.5, 0, 0}) == doctest::Approx(0.6));

  CHECK(tipping_index(1.125, 0.2) == doctest::Approx(1.125 / 0.775).epsilon(1e-14));
  CHECK(tipping_index(1.125, 0.2) == doctest::Approx(1.452).epsilon(1e-3));
  CHECK(tipping_index(0.7, 0.0) == 0.7);
  CHECK_THROWS_AS(tipping_index(5.0, 0.2), DivergentExpectationsError);
  CHECK_THROWS_AS(tipping_index(5.0, 0.2), ConfigError);

  CHECK(spawn_adjusted_slope(p) == doctest::Approx(1.125 * 2.125).epsilon(1e-14));
  CHECK(spawn_adjusted_slope(p) == doctest::Approx(2.391).epsilon(1e-3));
  CHECK(tipping_index(spawn_adjusted_slope(p), 0.2) == doctest::Approx(4.58).epsilon(2e-3));
  auto q = p;
  q.spawn_elasticity = 0;
  CHECK(spawn_adjusted_slope(q) == myopic_slope(q));
  TippingParams eq{0.2, 0.5, 0.5, 0, 1.0};
  CHECK(spawn_adjusted_slope(eq) == doctest::Approx(2 * myopic_slope(eq)));

  CHECK(beta_crit(0.8, 0.2, 0.3) == doctest::Approx(0.3667).epsilon(1e-3));
  CHECK(beta_crit(0.8, 0.2, 0.0) == doctest::Approx(2.0 / 3.0));
  CHECK(beta_crit(0.8, 0.2, 0.0) > 0.6);
  CHECK(beta_crit(0.8, 0.0, 0.0) == 0.8);
  CHECK(beta_crit(0.8, 0.2, 0.3, 0.1) == doctest::Approx(0.2667).epsilon(1e-3));
  CHECK_THROWS_AS(myopic_slope({0.3, 0.6, 0.0, 0.2, 0}), ConfigError);
}

TEST_CASE("S-curve iteration") {
  const auto traj = iterate_s_curve(0.55, 5.8, 5);
  REQUIRE(traj.size() == 6);
  // Direct evaluation of the stated map: the first step is 0.572, not 0.62.
  CHECK(traj[1] == doctest::Approx(1.0 / (1.0 + std::exp(-0.29))));
  for (std::size_t t = 1; t < traj.size(); ++t) CHECK(traj[t] > traj[t - 1]);
  CHECK(traj[5] < 0.9);

  for (double m : iterate_s_curve(0.5, 5.8, 10)) CHECK(m == 0.5);
  const auto down = iterate_s_curve(0.45, 5.8, 30);
  const auto up = iterate_s_curve(0.55, 5.8, 30);
  for (std::size_t t = 1; t < down.size(); ++t) {
    CHECK(down[t] < down[t - 1]);
    CHECK(down[t] == doctest::Approx(1.0 - up[t]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(iterate_s_curve(0.0, 5.8, 3), ConfigError);
  CHECK_THROWS_AS(iterate_s_curve(0.5, 0.0, 3), ConfigError);
}

TEST_CASE("tipping consistency property") {
  Stream rng(41, 0, StreamPurpose::property_test);
  for (int trial = 0; trial < 300; ++trial) {
    const double t_index = rng.uniform(0.2, 3.0);
    const double k = default_steepness(t_index);
    double m0 = rng.uniform(0.05, 0.95);
    if (std::abs(m0 - 0.5) < 0.02) m0 = 0.5 + (m0 < 0.5 ? -0.02 : 0.02);
    const auto m = iterate_s_curve(m0, k, 50);
    if (t_index > 1.05) {
      // Tipping: the iteration settles at the outer stable point on m0's side.
      const double up = s_curve_upper_fixed_point(k);
      const double target = m0 > 0.5 ? up : 1.0 - up;
      CHECK(std::abs(m.back() - target) < 0.02);
      CHECK(std::abs(m.back() - 0.5) > std::min(std::abs(m0 - 0.5), std::abs(target - 0.5)) - 1e-12);
      if (t_index >= 1.65) CHECK(std::min(m.back(), 1.0 - m.back()) < 0.05);
    } else if (t_index < 0.95) {
      CHECK(std::abs(m.back() - 0.5) < std::abs(m0 - 0.5));
      CHECK(std::abs(m.back() - 0.5) < 0.02);
    }
  }
  CHECK(s_curve_upper_fixed_point(3.0) == 0.5);
  const double up = s_curve_upper_fixed_point(5.8);
  CHECK(up == doctest::Approx(1.0 / (1.0 + std::exp(-5.8 * (up - 0.5)))).epsilon(1e-12));
  CHECK(up < 0.95);
}

TEST_CASE("lineage shadow and institutions") {
  const ShadowParams s{0.3, 0.5, 1.0};
  CHECK(lineage_shadow(5, s) == doctest::Approx(0.4).epsilon(1e-14));
  CHECK(lineage_shadow(20, s) == doctest::Approx(0.325).epsilon(1e-14));
  const ShadowParams flat{0.3, 0.0, 1.0};
  CHECK(lineage_shadow(7, flat) == 0.3);
  CHECK(institutional_floor(flat) == 0.0);
  CHECK(institutional_floor({0.5, 5.0, 1.0}) == doctest::Approx(10.0).epsilon(1e-14));
  // At the floor the shadow reaches exactly 1.
  const ShadowParams sq{0.2, 3.0, 2.0};
  CHECK(lineage_shadow(institutional_floor(sq), sq) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(lineage_shadow(0.0, s), ConfigError);
  CHECK_THROWS_AS(lineage_shadow(1.0, {1.0, 0.1, 1.0}), ConfigError);
}

TEST_CASE("cooperation thresholds") {
  CHECK(grim_trigger_threshold(3, 2, 1) == doctest::Approx(0.5));
  CHECK(grim_trigger_threshold(2, 2, 1) == 0.0);
  CHECK_THROWS_AS(grim_trigger_threshold(3, 1, 2), ConfigError);
  CHECK(n_player_threshold(2, 3, 3) == doctest::Approx(0.5));
  CHECK(n_player_threshold(2, 3, 1000000) == doctest::Approx(2.0 / 3.0).epsilon(1e-5));
  CHECK_THROWS_AS(n_player_threshold(2, 3, 1), ConfigError);
  CHECK(hamilton_invade(0.1, 0.40, 0.15) == false);
  CHECK(hamilton_invade(0.5, 0.40, 0.15) == true);
  CHECK(hamilton_invade(1.0, 0.40, 0.15) == true);
  CHECK(hamilton_invade(0.2, 1.0, 0.0) == true);
  CHECK(hamilton_invade(0.5, 0.30, 0.15) == false);  // knife edge rb = c
}

TEST_CASE("fork game") {
  const LineageUtility a{"A", 20, 12}, c{"C", 15, 14};
  const std::vector<double> losses{8, 1};
  const auto r = fork_analysis(losses, 3, 5, a, c);
  CHECK(r.fork_viable);
  CHECK(r.total_loss == 9);
  using M = ForkMove;
  REQUIRE(r.equilibria.size() == 2);
  CHECK(r.equilibria[0] == std::pair{M::stay, M::stay});
  CHECK(r.equilibria[1] == std::pair{M::fork, M::fork});
  REQUIRE(r.pareto_dominant.has_value());
  CHECK(*r.pareto_dominant == std::pair{M::fork, M::fork});
  CHECK(r.game.row[0][0] == 12);
  CHECK(r.game.col[0][0] == 14);
  CHECK(r.game.row[1][1] == 20);
  CHECK(r.game.col[1][1] == 15);
  CHECK(r.game.col[0][1] == 9);   // C forks alone
  CHECK(r.game.row[1][0] == 7);   // A forks alone

  CHECK_FALSE(fork_analysis(losses, 9, 5, a, c).fork_viable);
  CHECK_FALSE(fork_analysis(losses, 12, 5, a, c).fork_viable);

  // The worked table verbatim: its (Fork, Stay) cell (15, 14) makes forking
  // dominant for A, leaving a single equilibrium.
  ForkGame table;
  const double rows[2][2] = {{12, 12}, {15, 20}}, cols[2][2] = {{14, 9}, {14, 15}};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      table.row[i][j] = rows[i][j];
      table.col[i][j] = cols[i][j];
    }
  const auto eq = pure_nash(table);
  REQUIRE(eq.size() == 1);
  CHECK(eq[0] == std::pair{M::fork, M::fork});

  // Monotonicity of viability in compensation and losses.
  Stream rng(42, 0, StreamPurpose::property_test);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x{rng.uniform(0.1, 5), rng.uniform(0.1, 5)};
    const double comp = rng.uniform(0, 12);
    const bool v = fork_analysis(x, comp, 1, a, c).fork_viable;
    if (!v) CHECK_FALSE(fork_analysis(x, comp + rng.uniform(0, 3), 1, a, c).fork_viable);
    if (v) {
      auto y = x;
      y[t % 2] += rng.uniform(0, 3);
      CHECK(fork_analysis(y, comp, 1, a, c).fork_viable);
    }
  }
  CHECK_THROWS_AS(fork_analysis(std::vector<double>{0.0}, 1, 1, a, c), ConfigError);
}

TEST_CASE("utility-type selection") {
  const std::vector<double> y{0.5, 0.5}, f{1.0, 1.3};
  const auto next = usdi_step(y, f, 0.1);
  CHECK(next[0] < 0.5);
  CHECK(next[0] + next[1] == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<double> same{1.0, 1.0};
  const auto flat = usdi_step(y, same, 0.3);
  CHECK(flat[0] == doctest::Approx(0.5).epsilon(1e-15));
  // d/dt log(y_A / y_U) = F_A - F_U.
  const std::vector<double> y2{0.3, 0.7};
  const double dt = 1e-4;
  const auto n2 = usdi_step(y2, f, dt);
  const double rate = (std::log(n2[0] / n2[1]) - std::log(y2[0] / y2[1])) / dt;
  CHECK(std::abs(rate - (f[0] - f[1])) <= 1e-6);
  CHECK_THROWS_AS(usdi_step(std::vector<double>{0.5, 0.6}, f, 0.1), ConfigError);
}

TEST_CASE("governance thresholds") {
  const auto t = governance_thresholds({10, 5, 0.3, 0.35, 100, 10});
  CHECK(t.coalition_min_weight == doctest::Approx(0.15).epsilon(1e-14));
  CHECK(t.symbiosis_min_weight == doctest::Approx(1.5 / 11.5).epsilon(1e-14));
  CHECK(t.symbiosis_min_weight == doctest::Approx(0.1304).epsilon(1e-3));
  CHECK(t.optimal_bits == doctest::Approx(6.58).epsilon(5e-3));
  CHECK(t.capture_eps_crit == doctest::Approx(2.0 / 3.0));
  CHECK(governance_thresholds({4, 4, 0.5, 1, 2, 1}).capture_eps_crit == 0.5);
  CHECK_THROWS_AS(governance_thresholds({10, 5, 0.3, 0.35, 0, 10}), ConfigError);
  CHECK_THROWS_AS(governance_thresholds({10, 5, 1.3, 0.35, 1, 10}), ConfigError);
}

TEST_CASE("Umpire public good") {
  const auto u = umpire_game(5, 10, 100);
  CHECK(u.g_nash == 25.0);
  CHECK(u.g_per_lineage == 5.0);
  CHECK(u.u_nash == 145.0);
  CHECK(u.g_social_unconstrained == 625.0);
  CHECK(u.g_social == 500.0);
  CHECK(u.social_clipped);
  CHECK(u.u_social == doctest::Approx(10 * std::sqrt(500.0)).epsilon(1e-14));
  CHECK(u.u_social == doctest::Approx(223.6).epsilon(1e-3));
  CHECK(u.efficiency_loss == doctest::Approx(0.3515).epsilon(1e-3));

  const auto z = umpire_game(5, 0, 100);
  CHECK(z.g_nash == 0.0);
  CHECK(z.efficiency_loss == 0.0);

  const auto two = umpire_game(2, 4, 100);
  CHECK(two.g_nash == 4.0);
  CHECK(two.g_per_lineage == 2.0);
  CHECK(two.u_nash == 106.0);

  const auto cap = umpire_game(2, 40, 100);
  CHECK(cap.nash_at_cap);
  CHECK(cap.g_per_lineage == 100.0);

  // Nash is a best response: no unilateral deviation on a fine grid helps.
  for (double gi = 0; gi <= 100; gi += 0.25) {
    const double dev = (100 - gi) + 10 * std::sqrt(20 + gi);
    CHECK(dev <= u.u_nash + 1e-9);
  }
  CHECK_THROWS_AS(umpire_game(1, 10, 100), ConfigError);
}

TEST_CASE("elite tipping") {
  const std::vector<double> eq{0.5, 0.5}, t{2, 1};
  const auto e = elite_tipping(eq, t);
  CHECK(e.weighted == doctest::Approx(e.unweighted));
  const std::vector<double> w{0.8, 0.2};
  const auto hi = elite_tipping(w, t);
  CHECK(hi.weighted == doctest::Approx(1.8));
  CHECK(hi.unweighted == doctest::Approx(1.5));
  CHECK(hi.covariance_positive);
  const std::vector<double> anti{0.2, 0.8};
  const auto lo = elite_tipping(anti, t);
  CHECK(lo.weighted < lo.unweighted);
  CHECK_FALSE(lo.covariance_positive);
  CHECK(lo.weighted - lo.unweighted == doctest::Approx(lo.covariance));
}

TEST_CASE("discount unification") {
  const ShadowParams s{0.0, 0.5, 1.0};
  CHECK(unify_discounts(0.9, 0.0, 5, s).rho_amplifier == doctest::Approx(0.9));
  const auto d = unify_discounts(0.9, 0.5, 5, s);
  CHECK(d.rho_amplifier == doctest::Approx(0.9 / 0.55));
  CHECK(d.lineage_shadow == doctest::Approx(0.1 + 0.1));
  CHECK(d.delta_eff == doctest::Approx(5.0));
  CHECK_THROWS_AS(unify_discounts(0.9, 2.0, 5, s), ConfigError);

  // delta_eff >= delta* exactly when the shadow sits below (T - P)/(T - R).
  Stream rng(43, 0, StreamPurpose::property_test);
  for (int t = 0; t < 300; ++t) {
    const double b = rng.uniform(0.05, 1.0);
    const double inst = rng.uniform(0.5, 30);
    const ShadowParams p{0.0, rng.uniform(0, 2), rng.uniform(0.5, 2)};
    const auto u = unify_discounts(b, 0.0, inst, p);
    const double T = 3, R = rng.uniform(1.1, 2.9), P = 1;
    CHECK((u.delta_eff >= grim_trigger_threshold(T, R, P)) ==
          (u.lineage_shadow <= shadow_ceiling(T, R, P)));
  }
}
