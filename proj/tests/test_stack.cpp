#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "tse/dynamics.hpp"
#include "tse/rng.hpp"
#include "tse/stack.hpp"

using namespace tse;
using namespace tse::stack;

namespace {

LevelStack two_level() {
  LevelStack s;
  s.levels = {{0.3, "L1"}, {0.2, "L2"}};
  s.cross_beta = Matrix{{0, 0.1}, {0.15, 0}};
  return s;
}

double eigen_radius(const Matrix& m) {
  const auto n = static_cast<Eigen::Index>(m.rows());
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = m(i, j);
  return a.eigenvalues().cwiseAbs().maxCoeff();
}

// Truncated Neumann series v = sum_k (Gamma^T)^k 1.
std::vector<double> neumann_series(const Matrix& g) {
  const std::size_t n = g.rows();
  std::vector<double> term(n, 1.0), sum(n, 1.0);
  for (int k = 0; k < 20000; ++k) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) next[i] += g(j, i) * term[j];
    term = next;
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += term[i];
      mx = std::max(mx, term[i]);
    }
    if (mx < 1e-16) break;
  }
  return sum;
}

Matrix random_nonneg(Stream& rng, std::size_t n, double scale, double density = 1.0) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && rng.uniform() < density) m(i, j) = scale * rng.uniform();
  return m;
}

}  // namespace

TEST_CASE("gain matrix construction") {
  const auto g = build_gain_matrix(two_level());
  CHECK(g(0, 1) == doctest::Approx(0.1 / 0.7).epsilon(1e-14));
  CHECK(g(1, 0) == doctest::Approx(0.1875).epsilon(1e-14));
  CHECK(g(0, 0) == 0.0);
  CHECK(g(1, 1) == 0.0);

  LevelStack zero{{{0.1, ""}, {0.4, ""}}, Matrix(2, 2)};
  CHECK(build_gain_matrix(zero).max_abs() == 0.0);

  LevelStack three{{{0.5, ""}, {0.5, ""}, {0.5, ""}}, Matrix{{0, .1, .1}, {.1, 0, .1}, {.1, .1, 0}}};
  const auto g3 = build_gain_matrix(three);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(g3(i, j) == doctest::Approx(i == j ? 0.0 : 0.2));

  LevelStack bad = two_level();
  bad.levels[1].gamma_self = 1.0;
  CHECK_THROWS_WITH_AS(build_gain_matrix(bad), doctest::Contains("H-gamma violated at level 1"),
                       ConfigError);
  LevelStack diag = two_level();
  diag.cross_beta(0, 0) = 0.1;
  CHECK_THROWS_AS(build_gain_matrix(diag), ConfigError);
  LevelStack neg = two_level();
  neg.cross_beta(0, 1) = -0.1;
  CHECK_THROWS_AS(build_gain_matrix(neg), ConfigError);
}

TEST_CASE("spectral radius") {
  const auto g = build_gain_matrix(two_level());
  CHECK(spectral_radius(g) == doctest::Approx(std::sqrt(g(0, 1) * g(1, 0))).epsilon(1e-11));
  CHECK(spectral_radius(g) == doctest::Approx(0.1637).epsilon(1e-3));
  CHECK(spectral_radius(Matrix(3, 3)) == 0.0);
  CHECK(spectral_radius(Matrix{{0, 0.04}, {0.09, 0}}) == doctest::Approx(0.06).epsilon(1e-12));
  // Nilpotent feed-forward coupling has radius zero.
  CHECK(spectral_radius(Matrix{{0, 0.5, 0.2}, {0, 0, 0.7}, {0, 0, 0}}) == 0.0);
  CHECK_THROWS_AS(spectral_radius(Matrix{{0, -1}, {1, 0}}), ConfigError);

  Stream rng(31, 0, StreamPurpose::property_test);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(6);
    const auto m = random_nonneg(rng, n, rng.uniform(0.05, 1.0), t % 3 == 0 ? 0.4 : 1.0);
    const double rho = spectral_radius(m);
    CHECK(rho == doctest::Approx(eigen_radius(m)).epsilon(1e-9).scale(1.0));
    CHECK(rho <= gershgorin_bound(m) + 1e-12);
  }
}

TEST_CASE("neumann weights") {
  const std::vector<double> gam{0.3, 0.2};
  const auto g = build_gain_matrix(two_level());
  const auto w = neumann_weights(gam, g);
  CHECK(w.v[0] == doctest::Approx(1.22018).epsilon(1e-5));
  CHECK(w.v[1] == doctest::Approx(1.17431).epsilon(1e-5));
  CHECK(w.alpha[0] == doctest::Approx(1.7431).epsilon(1e-4));
  CHECK(w.alpha[1] == doctest::Approx(1.4679).epsilon(1e-4));
  CHECK(w.residual <= 1e-10);
  const auto series = neumann_series(g);
  CHECK(w.v[0] == doctest::Approx(series[0]).epsilon(1e-12));
  CHECK(w.v[1] == doctest::Approx(series[1]).epsilon(1e-12));
  // The printed values (1.028, 1.147) leave a visible residual.
  CHECK(std::abs(1.028 - g(1, 0) * 1.147 - 1.0) > 0.1);

  const auto z = neumann_weights(gam, Matrix(2, 2));
  CHECK(z.v == std::vector<double>{1.0, 1.0});
  CHECK(z.alpha[0] == doctest::Approx(1 / 0.7));

  const Matrix near{{0, 0.99}, {0.99, 0}};
  const auto nw = neumann_weights(std::vector<double>{0.0, 0.0}, near);
  CHECK(nw.v[0] == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(nw.residual <= 1e-10);

  CHECK_THROWS_AS(neumann_weights(std::vector<double>{0.0, 0.0}, Matrix{{0, 1.2}, {1.0, 0}}),
                  WeightNonexistenceError);
  CHECK_THROWS_AS(neumann_weights(std::vector<double>{0.0, 0.0}, Matrix{{0, 1.0}, {1.0, 0}}),
                  WeightNonexistenceError);
  CHECK(classify_radius(1.0) == SmallGain::critical);
  CHECK(classify_radius(1.0 + 1e-10) == SmallGain::critical);
  CHECK(classify_radius(1.0 + 1e-8) == SmallGain::failed);

  Stream rng(32, 0, StreamPurpose::property_test);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(6);
    const auto m = random_nonneg(rng, n, 0.8 / static_cast<double>(n));
    std::vector<double> gs(n);
    for (auto& x : gs) x = rng.uniform(0.0, 0.9);
    const auto a = analyze_gain(m, gs);
    REQUIRE(a.weights.has_value());
    CHECK(a.weights->residual <= 1e-10);
    for (double v : a.weights->v) CHECK(v >= 1.0);
    CHECK(a.slack == doctest::Approx(1.0 - a.rho));
  }
}

TEST_CASE("gain report") {
  std::ostringstream os;
  write_gain_report(os, analyze_stack(two_level()));
  CHECK(os.str().find("small_gain=safe") != std::string::npos);
  CHECK(os.str().find("# gain matrix\n0,") != std::string::npos);
}

TEST_CASE("joint lyapunov function") {
  using namespace tse::dynamics;
  const auto coord = FitnessModel::linear(Matrix{{2, 0}, {0, 1}});

  SUBCASE("uncoupled coordination levels") {
    LevelStack s{{{0.0, ""}, {0.0, ""}}, Matrix(2, 2)};
    const auto a = analyze_stack(s);
    const auto t1 = integrate_replicator(PopulationState({0.6, 0.4}), coord, 10, 0.01);
    const auto t2 = integrate_replicator(PopulationState({0.2, 0.8}), coord, 10, 0.01);
    std::vector<LevelSeries> series(2);
    for (std::size_t k = 0; k < t1.size(); ++k) {
      for (int l = 0; l < 2; ++l) {
        const auto& tr = l == 0 ? t1 : t2;
        const auto p = price_decomposition(PopulationState(tr.states[k], 0.0), coord);
        series[l].mean_fitness.push_back(p.mean_fitness);
        series[l].variance.push_back(p.variance);
      }
    }
    const auto r = joint_lyapunov(a, t1.times, series, 1e-7);
    CHECK(r.nondecreasing);
    CHECK(r.monotone);
  }

  SUBCASE("frozen states") {
    const auto a = analyze_stack(two_level());
    const std::vector<double> times{0, 1, 2};
    const std::vector<LevelSeries> series{{{1, 1, 1}, {0, 0, 0}}, {{2, 2, 2}, {0, 0, 0}}};
    const auto r = joint_lyapunov(a, times, series);
    CHECK(r.psi[0] == r.psi[2]);
    CHECK(r.nondecreasing);
    CHECK(r.min_margin == 0.0);
  }

  SUBCASE("coupled levels within the stated bounds") {
    // Each level plays coordination; its fitness is shifted uniformly by
    // -k times the other level's own mean. The shift leaves selection alone
    // but drains the mean: E_cross = -k d(mean_other)/dt = -2k Var_other,
    // so beta = 2k, and E_self = Var so gamma = 0.
    const double k12 = 0.05, k21 = 0.08;
    LevelStack s{{{0.0, ""}, {0.0, ""}}, Matrix{{0, 2 * k12}, {2 * k21, 0}}};
    const auto a = analyze_stack(s);
    REQUIRE(a.weights.has_value());
    const auto t1 = integrate_replicator(PopulationState({0.45, 0.55}), coord, 12, 0.01);
    const auto t2 = integrate_replicator(PopulationState({0.7, 0.3}), coord, 12, 0.01);
    std::vector<LevelSeries> series(2);
    for (std::size_t k = 0; k < t1.size(); ++k) {
      const auto p1 = price_decomposition(PopulationState(t1.states[k], 0.0), coord);
      const auto p2 = price_decomposition(PopulationState(t2.states[k], 0.0), coord);
      series[0].mean_fitness.push_back(p1.mean_fitness - k12 * p2.mean_fitness);
      series[0].variance.push_back(p1.variance);
      series[1].mean_fitness.push_back(p2.mean_fitness - k21 * p1.mean_fitness);
      series[1].variance.push_back(p2.variance);
    }
    const auto r = joint_lyapunov(a, t1.times, series, 1e-6);
    CHECK(r.nondecreasing);
    CHECK(r.monotone);
    // Without weights the raw sum may still rise, but a strong one-sided drain breaks it.
    LevelStack strong{{{0.0, ""}, {0.0, ""}}, Matrix{{0, 3.0}, {3.0, 0}}};
    CHECK_FALSE(analyze_stack(strong).weights.has_value());
  }

  const auto a = analyze_stack(two_level());
  const std::vector<double> times{0, 1};
  const std::vector<LevelSeries> bad{{{1, 1}, {0, 0}}};
  CHECK_THROWS_AS(joint_lyapunov(a, times, bad), ConfigError);
  const std::vector<LevelSeries> ragged{{{1, 1}, {0, 0}}, {{1}, {0}}};
  CHECK_THROWS_AS(joint_lyapunov(a, times, ragged), ConfigError);
}

TEST_CASE("block extension") {
  const auto base = analyze_stack(two_level());
  const std::vector<double> zero{0, 0};
  const auto e0 = extend_block(base, zero, zero);
  CHECK(e0.extended.rho == doctest::Approx(base.rho).epsilon(1e-12));
  CHECK(e0.extended.slack == doctest::Approx(base.slack).epsilon(1e-12));
  CHECK(e0.slack_bound_ok);

  const std::vector<double> b{0.05, 0.05}, c{0.05, 0.05};
  const auto e1 = extend_block(base, b, c);
  CHECK(e1.extended.rho == doctest::Approx(eigen_radius(e1.extended.gain)).epsilon(1e-10));
  CHECK(e1.extended.rho >= base.rho);
  CHECK(e1.condition_holds);
  CHECK(e1.slack_bound_ok);
  CHECK(e1.extended.slack >= (1 - e1.theta_effective) * base.slack);

  // Scale the border until the small-gain condition breaks.
  double scale = 1.0;
  BlockExtension e = e1;
  while (e.extended.status == SmallGain::safe && scale < 1e6) {
    scale *= 1.5;
    const std::vector<double> bs{0.05 * scale, 0.05 * scale}, cs{0.05 * scale, 0.05 * scale};
    e = extend_block(base, bs, cs);
    CHECK(e.extended.rho >= base.rho);
  }
  CHECK(e.extended.rho >= 1.0);
  CHECK_FALSE(e.extended.weights.has_value());
  CHECK_THROWS_AS(neumann_weights(e.extended.gammas, e.extended.gain), WeightNonexistenceError);

  Stream rng(33, 0, StreamPurpose::property_test);
  for (int t = 0; t < 50; ++t) {
    const auto g = random_nonneg(rng, 3, 0.3);
    const auto a = analyze_gain(g, std::vector<double>{0.1, 0.2, 0.3});
    if (!a.weights) continue;
    std::vector<double> bb(3), cc(3);
    for (auto& x : bb) x = rng.uniform(0.0, 0.3);
    for (auto& x : cc) x = rng.uniform(0.0, 0.3);
    const auto ex = extend_block(a, bb, cc);
    CHECK(ex.extended.rho >= a.rho - 1e-12);
  }
}

TEST_CASE("slack budget") {
  const std::vector<double> th{0.05, 0.08, 0.06, 0.04, 0.10, 0.07};
  const auto sb = slack_budget(th, 0.5, 0.1);
  CHECK(sb.total == doctest::Approx(0.415).epsilon(2e-3));
  CHECK(sb.budget == doctest::Approx(1.609).epsilon(1e-3));
  CHECK(sb.safe);
  CHECK(sb.remaining_slack == doctest::Approx(0.330).epsilon(2e-3));
  double prod = 0.5;
  for (double t : th) prod *= 1 - t;
  CHECK(std::abs(sb.remaining_slack - prod) <= 1e-12);
  CHECK(std::abs(sb.remaining_slack - 0.5 * std::exp(-sb.total)) <= 1e-12);

  const auto empty = slack_budget({}, 0.5, 0.1);
  CHECK(empty.total == 0.0);
  CHECK(empty.remaining_slack == 0.5);
  CHECK(safe_depth_uniform(0.07, 0.5, 0.1) == 22);

  CHECK_THROWS_AS(slack_budget(th, 0.1, 0.5), ConfigError);
  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(slack_budget(bad, 0.5, 0.1), ConfigError);
}

TEST_CASE("alignment matrix") {
  const std::vector<std::vector<double>> same{{1, 2}, {2, 4}};
  const auto a = alignment_analysis(same);
  CHECK(a.alignment(0, 1) == doctest::Approx(1.0));
  CHECK(a.min_eigenvalue == doctest::Approx(0.0).scale(1.0));

  const std::vector<std::vector<double>> orth{{1, 0}, {0, 3}};
  const auto o = alignment_analysis(orth);
  CHECK(o.alignment == Matrix::identity(2));
  CHECK(o.min_eigenvalue == doctest::Approx(1.0));
  CHECK(strong_alignment(o, 1.0));
  CHECK_FALSE(strong_alignment(a, 0.1));

  const std::vector<std::vector<double>> zero{{0, 0}, {1, 0}};
  CHECK_THROWS_AS(alignment_analysis(zero), ConfigError);

  const double g = std::sqrt(2.0) - 1.0;
  CHECK(misalignment_hopf_threshold(g, g) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}
