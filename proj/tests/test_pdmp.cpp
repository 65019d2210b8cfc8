#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "tse/pdmp.hpp"
#include "tse/rng.hpp"

using namespace tse;
using namespace tse::pdmp;

namespace {

// Five-strategy pool: offsets plus pairwise interaction rows.
FitnessModel example_pool() {
  Matrix a(5, 5);
  a(0, 1) = 0.2;
  a(0, 2) = -0.1;
  a(1, 0) = -0.1;
  a(1, 2) = 0.3;
  a(2, 0) = 0.1;
  a(2, 1) = -0.2;
  a(3, 0) = -0.3;
  a(4, 0) = -0.4;
  return FitnessModel::linear(a, {1.0, 0.8, 0.9, 1.1, 1.2});
}

PdmpConfig example_config() {
  return PdmpConfig(example_pool(), {0.5, 0.3, 0.2, 0.0, 0.0});
}

double mean_fitness(const std::vector<double>& x) {
  const double f[5] = {1.0 + 0.2 * x[1] - 0.1 * x[2], 0.8 - 0.1 * x[0] + 0.3 * x[2],
                       0.9 + 0.1 * x[0] - 0.2 * x[1], 1.1 - 0.3 * x[0], 1.2 - 0.4 * x[0]};
  double m = 0.0;
  for (int i = 0; i < 5; ++i) m += x[i] * f[i];
  return m;
}

double sum(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0); }

}  // namespace

TEST_CASE("foster value") {
  CHECK(foster_lyapunov(0.988, 4, 0.2) == doctest::Approx(-0.188).epsilon(1e-12));
  CHECK(foster_lyapunov(0.0, 0, 0.2) == 0.0);
  const double a = foster_lyapunov(0.9, 3, 0.35), b = foster_lyapunov(0.9, 7, 0.35);
  CHECK((b - a) / 4.0 == doctest::Approx(0.35).epsilon(1e-12));
  const std::vector<double> x{0.5, 0.3, 0.2, 0.0, 0.0};
  CHECK(foster_lyapunov(x, example_pool(), 3, 0.2) ==
        doctest::Approx(-mean_fitness(x) + 0.6).epsilon(1e-14));
}

TEST_CASE("no innovation: pure replicator phase") {
  auto cfg = example_config();
  cfg.innovation_rate = 0.0;
  cfg.horizon = 2.0;
  const auto r = pdmp_simulate(cfg);
  CHECK(r.events.empty());
  CHECK_FALSE(r.pool_exhausted);
  REQUIRE(r.trajectory.size() == 21);
  CHECK(r.trajectory.times.back() == 2.0);
  // Direct evaluation at the initial state.
  CHECK(mean_fitness(r.trajectory.states[0]) == doctest::Approx(0.941).epsilon(1e-12));
  for (std::size_t k = 1; k < r.trajectory.size(); ++k) {
    const auto& prev = r.trajectory.states[k - 1];
    const auto& cur = r.trajectory.states[k];
    CHECK(mean_fitness(cur) >= mean_fitness(prev) - 1e-12);
    CHECK(cur[0] > prev[0]);
    CHECK(cur[1] < prev[1]);
    CHECK(cur[3] == 0.0);
    CHECK(r.active_set_size[k] == 3);
    CHECK(r.foster[k] == doctest::Approx(-mean_fitness(cur) + 0.6).epsilon(1e-12));
  }
  CHECK(mean_fitness(r.trajectory.states.back()) > mean_fitness(r.trajectory.states.front()));

  const auto s = stationary_active_set(cfg, 4.0, 1.0);
  CHECK(s.mean_active == 3.0);
  CHECK(s.standard_error == 0.0);
  CHECK(s.eeb_satisfied);
}

TEST_CASE("specialist entrant invades a majority-1 resident") {
  // On the 1-3 edge f1 = f3, so the resident is neutral there. Strategy 5
  // beats it only while x1 < 0.6.
  auto cfg = example_config();
  cfg.initial_state = {0.55, 0.0, 0.45, 0.0, 0.0};
  cfg.entry_order = {4};
  cfg.innovation_rate = 50.0;
  cfg.horizon = 40.0;
  const auto r = pdmp_simulate(cfg);
  REQUIRE(r.innovations == 1);
  CHECK(r.events.front().strategy == 4);
  CHECK(r.pool_exhausted);
  double peak = 0.0;
  for (const auto& x : r.trajectory.states) peak = std::max(peak, x[4]);
  CHECK(peak > 2.0 * cfg.entry_mass);
  CHECK(r.trajectory.states.back()[4] > 2.0 * cfg.entry_mass);

  // An x1 = 0.68 resident sits past the invasion boundary.
  cfg.initial_state = {0.68, 0.0, 0.32, 0.0, 0.0};
  const auto q = pdmp_simulate(cfg);
  double top = 0.0;
  for (const auto& x : q.trajectory.states) top = std::max(top, x[4]);
  CHECK(top <= cfg.entry_mass + 1e-12);
}

TEST_CASE("events: bookkeeping, mass conservation, thresholds") {
  auto cfg = example_config();
  cfg.horizon = 300.0;
  cfg.recycle = true;
  cfg.seed = 3;
  const auto r = pdmp_simulate(cfg);
  REQUIRE(r.innovations > 5);
  REQUIRE(r.extinctions > 0);
  double last = 0.0;
  for (const auto& e : r.events) {
    CHECK(e.time >= last);
    last = e.time;
    CHECK(std::abs(sum(e.post_state) - 1.0) <= 1e-12);
    CHECK(std::abs(sum(e.pre_state) - 1.0) <= 1e-12);
    if (e.kind == EventKind::innovation) {
      CHECK(e.pre_state[e.strategy] == 0.0);
      CHECK(e.post_state[e.strategy] == cfg.entry_mass);
      for (std::size_t i = 0; i < 5; ++i)
        if (i != e.strategy) CHECK(e.post_state[i] == e.pre_state[i] * (1.0 - cfg.entry_mass));
    } else {
      CHECK(e.pre_state[e.strategy] < cfg.exit_threshold);
      // Either a flow crossing or dilution by an entrant at the same instant.
      const bool diluted = &e != &r.events.front() && (&e - 1)->time == e.time;
      CHECK((e.pre_state[e.strategy] > cfg.exit_threshold - 1e-6 || diluted));
      CHECK(e.post_state[e.strategy] == 0.0);
    }
  }
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    const auto& x = r.trajectory.states[k];
    CHECK(std::abs(sum(x) - 1.0) <= 1e-12);
    for (double v : x) CHECK((v == 0.0 || v >= cfg.exit_threshold));
  }
  CHECK(active_set_time_average(r, 0.0, 300.0) > 0.0);

  std::ostringstream ev, tr;
  write_events_csv(ev, r);
  write_trajectory_csv(tr, r, cfg.model);
  CHECK(ev.str().rfind("time,kind,strategy,x_0,x_1,x_2,x_3,x_4\n", 0) == 0);
  CHECK(tr.str().rfind("t,x_0,x_1,x_2,x_3,x_4,mean_fitness,variance,externality,active_set_size,foster_value\n", 0) == 0);
}

TEST_CASE("exhausted pool stops innovations") {
  auto cfg = example_config();
  cfg.innovation_rate = 5.0;
  cfg.horizon = 20.0;
  const auto r = pdmp_simulate(cfg);
  CHECK(r.innovations == 2);
  CHECK(r.pool_exhausted);
}

TEST_CASE("random configs: determinism and conservation") {
  Stream rng(61, 0, StreamPurpose::property_test);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 3 + rng.below(4);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    std::vector<double> x0(n, 0.0);
    const std::size_t active = 1 + rng.below(n - 1);
    for (std::size_t i = 0; i < active; ++i) x0[i] = rng.uniform(0.2, 1.0);
    const double total = sum(x0);
    for (double& v : x0) v /= total;
    PdmpConfig cfg(FitnessModel::linear(a), x0);
    cfg.innovation_rate = rng.uniform(0.0, 1.0);
    cfg.entry_mass = rng.uniform(0.03, 0.2);
    cfg.exit_threshold = rng.uniform(0.005, 0.02);
    cfg.horizon = 30.0;
    cfg.recycle = t % 2 == 0;
    cfg.seed = rng.below(1000);
    const auto r1 = pdmp_simulate(cfg);
    const auto r2 = pdmp_simulate(cfg);
    REQUIRE(r1.events.size() == r2.events.size());
    for (std::size_t k = 0; k < r1.events.size(); ++k) {
      CHECK(r1.events[k].time == r2.events[k].time);
      CHECK(r1.events[k].strategy == r2.events[k].strategy);
      CHECK(r1.events[k].post_state == r2.events[k].post_state);
      CHECK(std::abs(sum(r1.events[k].post_state) - 1.0) <= 1e-12);
    }
    CHECK(r1.trajectory.states == r2.trajectory.states);
    for (const auto& x : r1.trajectory.states) CHECK(std::abs(sum(x) - 1.0) <= 1e-12);
  }
}

TEST_CASE("config validation") {
  auto cfg = example_config();
  cfg.exit_threshold = 0.06;
  CHECK_THROWS_AS(pdmp_simulate(cfg), ConfigError);
  cfg = example_config();
  cfg.initial_state = {0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(pdmp_simulate(cfg), ConfigError);
  cfg = example_config();
  cfg.initial_state = {0.5, 0.5};
  CHECK_THROWS_AS(pdmp_simulate(cfg), ConfigError);
  cfg = example_config();
  cfg.entry_order = {7};
  CHECK_THROWS_AS(pdmp_simulate(cfg), ConfigError);
  cfg = example_config();
  cfg.innovation_rate = -1.0;
  CHECK_THROWS_AS(pdmp_simulate(cfg), ConfigError);
}

TEST_CASE("stationary active set") {
  auto cfg = example_config();
  cfg.recycle = true;
  cfg.seed = 11;
  const auto base = stationary_active_set(cfg, 4000.0, 400.0);
  MESSAGE("mean |S| = " << base.mean_active << " +- " << base.standard_error
                        << ", exit hazard " << base.exit_hazard << ", innovations "
                        << base.run.innovations << ", extinctions " << base.run.extinctions);
  CHECK(base.mean_active >= 2.5);
  CHECK(base.mean_active <= 4.5);
  CHECK(base.eeb_satisfied);
  CHECK(base.innovation_rate == doctest::Approx(0.1).epsilon(0.15));

  auto doubled = cfg;
  doubled.innovation_rate = 0.2;
  const auto hi = stationary_active_set(doubled, 4000.0, 400.0);
  MESSAGE("doubled rate: mean |S| = " << hi.mean_active << " +- " << hi.standard_error);
  CHECK(hi.mean_active > base.mean_active);

  for (std::uint64_t seed = 20; seed < 30; ++seed) {
    cfg.seed = doubled.seed = seed;
    const auto lo = stationary_active_set(cfg, 4000.0, 400.0);
    CHECK(lo.mean_active >= 2.5);
    CHECK(lo.mean_active <= 4.5);
    CHECK(stationary_active_set(doubled, 4000.0, 400.0).mean_active > lo.mean_active);
  }
}
