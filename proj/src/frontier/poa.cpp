#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "tse/dynamics.hpp"
#include "tse/frontier.hpp"

namespace tse::frontier {

namespace {

constexpr double kTol = 1e-9;

double mean_of(std::span<const double> x, std::span<const double> f) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m += x[i] * f[i];
  return m;
}

std::vector<std::size_t> members(unsigned mask, std::size_t n) {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < n; ++i)
    if (mask & (1u << i)) s.push_back(i);
  return s;
}

// Solves  sum_{k in S} A_ik x_k + offset_i = v  (i in S),  sum x = 1.
std::optional<std::vector<double>> face_solution(const Matrix& a, std::span<const double> offset,
                                                 const std::vector<std::size_t>& s,
                                                 std::size_t n) {
  const auto m = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(m + 1, m + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index c = 0; c < m; ++c) sys(r, c) = a(s[r], s[c]);
    sys(r, m) = -1.0;
    rhs(r) = offset.empty() ? 0.0 : -offset[s[r]];
  }
  for (Eigen::Index c = 0; c < m; ++c) sys(m, c) = 1.0;
  rhs(m) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::VectorXd sol = lu.solve(rhs);
  std::vector<double> x(n, 0.0);
  for (Eigen::Index c = 0; c < m; ++c) {
    if (!(sol(c) > 1e-12)) return std::nullopt;
    x[s[c]] = sol(c);
  }
  return x;
}

bool support_stable(const FitnessModel& model, std::span<const double> x,
                    std::span<const double> f, double mean) {
  const std::size_t n = x.size();
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0)
      s.push_back(i);
    else if (f[i] >= mean - kTol)
      return false;
  }
  if (s.size() == 1) return true;
  const Matrix df = model.jacobian(x);
  // d mean / d x_k = f_k + sum_j x_j df_j/dx_k
  std::vector<double> dmean(n);
  for (std::size_t k = 0; k < n; ++k) {
    dmean[k] = f[k];
    for (std::size_t j = 0; j < n; ++j) dmean[k] += x[j] * df(j, k);
  }
  const auto m = static_cast<Eigen::Index>(s.size());
  Eigen::MatrixXd js(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c)
      js(r, c) = (r == c ? f[s[r]] - mean : 0.0) + x[s[r]] * (df(s[r], s[c]) - dmean[s[c]]);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(m, m - 1);
  for (Eigen::Index c = 0; c + 1 < m; ++c) {
    basis(c, c) = 1.0;
    basis(m - 1, c) = -1.0;
  }
  const Eigen::MatrixXd reduced =
      (basis.transpose() * basis).ldlt().solve(basis.transpose() * js * basis);
  Eigen::EigenSolver<Eigen::MatrixXd> es(reduced, false);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (!(es.eigenvalues()(i).real() < -kTol)) return false;
  return true;
}

void add_unique(std::vector<Equilibrium>& eqs, Equilibrium e) {
  for (const auto& q : eqs) {
    double d = 0.0;
    for (std::size_t i = 0; i < e.state.size(); ++i) d = std::max(d, std::abs(q.state[i] - e.state[i]));
    if (d <= 1e-9) return;
  }
  eqs.push_back(std::move(e));
}

}  // namespace

std::vector<Equilibrium> nash_equilibria(const FitnessModel& model, std::size_t grid_resolution) {
  if (!model.is_linear()) throw ConfigError("equilibrium enumeration needs a linear model");
  const std::size_t n = model.dimension();
  if (n > 6) throw ConfigError("equilibrium enumeration supports at most 6 types");
  std::vector<Equilibrium> eqs;
  const auto consider = [&](std::vector<double> x) {
    const auto f = model.evaluate(x);
    const double mean = mean_of(x, f);
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] > 0.0 && std::abs(f[i] - mean) > kTol) return;
      if (x[i] == 0.0 && f[i] > mean + kTol) return;
    }
    Equilibrium e{x, mean, support_stable(model, x, f, mean)};
    add_unique(eqs, std::move(e));
  };
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (auto x = face_solution(model.payoff(), model.offset(), members(mask, n), n))
      consider(std::move(*x));
  }
  if (grid_resolution >= 1)
    for (auto& x : dynamics::simplex_grid(n, grid_resolution)) consider(std::move(x));
  return eqs;
}

PoaReport price_of_anarchy(const FitnessModel& model, std::size_t grid_resolution) {
  if (!model.is_linear()) throw ConfigError("price of anarchy needs a linear model");
  const std::size_t n = model.dimension();
  if (n > 4) throw ConfigError("price of anarchy brute force supports at most 4 types");
  if (grid_resolution < 2) throw ConfigError("grid resolution must be >= 2");

  PoaReport rep;
  rep.optimum = -std::numeric_limits<double>::infinity();
  const auto try_optimum = [&](const std::vector<double>& x) {
    const double v = mean_of(x, model.evaluate(x));
    if (v > rep.optimum + 1e-15) {
      rep.optimum = v;
      rep.optimum_state = x;
    }
  };
  const auto grid = dynamics::simplex_grid(n, grid_resolution);
  for (const auto& x : grid) try_optimum(x);
  // KKT points of the quadratic mean fitness on every face.
  const Matrix& pi = model.payoff();
  const Matrix sym = pi + pi.transposed();
  for (unsigned mask = 1; mask < (1u << n); ++mask)
    if (auto x = face_solution(sym, model.offset(), members(mask, n), n)) try_optimum(*x);

  const auto eqs = nash_equilibria(model, grid_resolution);
  if (eqs.empty()) throw NumericalError("no Nash equilibrium found");
  const Equilibrium* worst = nullptr;
  for (const auto& e : eqs)
    if (e.stable && (!worst || e.mean_fitness < worst->mean_fitness)) worst = &e;
  rep.worst_is_stable = worst != nullptr;
  if (!worst)
    for (const auto& e : eqs)
      if (!worst || e.mean_fitness < worst->mean_fitness) worst = &e;
  rep.worst_equilibrium = worst->mean_fitness;
  rep.worst_state = worst->state;
  if (rep.worst_equilibrium > 0.0) rep.poa = rep.optimum / rep.worst_equilibrium;

  for (const auto& x : grid) {
    const auto terms = dynamics::price_decomposition(PopulationState(x, 0.0), model);
    if (terms.variance > 1e-12)
      rep.gamma = std::max(rep.gamma, std::abs(terms.externality) / terms.variance);
  }
  if (rep.gamma < 1.0) rep.bound = 1.0 / (1.0 - rep.gamma);
  rep.within_bound = rep.poa.has_value() && (!rep.bound || *rep.poa <= *rep.bound + 1e-9);
  return rep;
}

}  // namespace tse::frontier
