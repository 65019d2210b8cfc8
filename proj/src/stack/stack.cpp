#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "tse/stack.hpp"

namespace tse::stack {

void LevelStack::validate() const {
  const std::size_t n = levels.size();
  if (n == 0) throw ConfigError("level stack is empty");
  if (cross_beta.rows() != n || cross_beta.cols() != n)
    throw ConfigError("cross_beta must be " + std::to_string(n) + "x" + std::to_string(n));
  for (std::size_t l = 0; l < n; ++l) {
    const double g = levels[l].gamma_self;
    if (!std::isfinite(g) || g < 0.0)
      throw ConfigError("gamma_self at level " + std::to_string(l) + " must be finite and >= 0");
    if (g >= 1.0)
      throw ConfigError("H-gamma violated at level " + std::to_string(l) + " (gamma_self = " +
                        format_double(g) + " >= 1)");
    for (std::size_t m = 0; m < n; ++m) {
      const double b = cross_beta(l, m);
      if (l == m && b != 0.0) throw ConfigError("cross_beta diagonal must be exactly 0");
      if (!std::isfinite(b) || b < 0.0) throw ConfigError("cross_beta entries must be >= 0");
    }
  }
}

std::vector<double> LevelStack::gammas() const {
  std::vector<double> g;
  for (const auto& l : levels) g.push_back(l.gamma_self);
  return g;
}

Matrix build_gain_matrix(const LevelStack& stack) {
  stack.validate();
  const std::size_t n = stack.levels.size();
  Matrix g(n, n);
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t m = 0; m < n; ++m)
      if (l != m) g(l, m) = stack.cross_beta(l, m) / (1.0 - stack.levels[l].gamma_self);
  return g;
}

namespace {

// Strongly connected components of the graph with an edge i -> j when m(i, j) > 0.
std::vector<std::vector<std::size_t>> components(const Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w = 0; w < n; ++w) {
      if (!(m(v, w) > 0.0)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      out.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return out;
}

// Irreducible block: shifted power iteration, stop when the Collatz-Wielandt
// bracket min_i (Bx)_i/x_i <= rho(B) <= max_i (Bx)_i/x_i is tight.
double irreducible_radius(const Matrix& a, double tol, std::size_t max_iter) {
  const std::size_t n = a.rows();
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a(i, j);
    shift = std::max(shift, s);
  }
  if (shift == 0.0) return 0.0;
  std::vector<double> x(n, 1.0), y(n);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = shift * x[i];
      for (std::size_t j = 0; j < n; ++j) s += a(i, j) * x[j];
      y[i] = s;
      lo = std::min(lo, s / x[i]);
      hi = std::max(hi, s / x[i]);
      norm = std::max(norm, s);
    }
    if (hi - lo <= tol * std::max(1.0, hi)) return std::max(0.0, 0.5 * (lo + hi) - shift);
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
  }
  throw NumericalError("spectral radius power iteration did not converge after " +
                       std::to_string(max_iter) + " iterations");
}

}  // namespace

double spectral_radius(const Matrix& m, double tol, std::size_t max_iter) {
  if (!m.square()) throw ConfigError("spectral radius needs a square matrix");
  for (double v : m.data())
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("spectral radius expects a finite nonnegative matrix");
  double rho = 0.0;
  for (const auto& comp : components(m)) {
    const std::size_t k = comp.size();
    if (k == 1 && !(m(comp[0], comp[0]) > 0.0)) continue;
    Matrix sub(k, k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) sub(i, j) = m(comp[i], comp[j]);
    rho = std::max(rho, irreducible_radius(sub, tol, max_iter));
  }
  return rho;
}

double gershgorin_bound(const Matrix& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (double v : m.row(i)) s += std::abs(v);
    best = std::max(best, s);
  }
  return best;
}

SmallGain classify_radius(double rho) {
  if (rho < 1.0 - 1e-9) return SmallGain::safe;
  if (rho <= 1.0 + 1e-9) return SmallGain::critical;
  return SmallGain::failed;
}

const char* to_string(SmallGain s) {
  switch (s) {
    case SmallGain::safe: return "safe";
    case SmallGain::critical: return "critical";
    case SmallGain::failed: return "failed";
  }
  return "unknown";
}

NeumannWeights neumann_weights(std::span<const double> gammas, const Matrix& gain) {
  const std::size_t n = gain.rows();
  if (!gain.square() || gammas.size() != n)
    throw ConfigError("gain matrix and gamma list dimensions differ");
  for (double g : gammas)
    if (!(g >= 0.0 && g < 1.0)) throw ConfigError("every gamma_self must lie in [0, 1)");
  const double rho = spectral_radius(gain);
  if (classify_radius(rho) != SmallGain::safe)
    throw WeightNonexistenceError("small-gain condition fails (rho = " + format_double(rho) +
                                  "): no positive Lyapunov weights exist");
  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) sys(i, j) -= gain(j, i);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(dim);
  const Eigen::VectorXd v = sys.fullPivLu().solve(ones);

  NeumannWeights w;
  w.v.assign(v.data(), v.data() + n);
  w.residual = (sys * v - ones).cwiseAbs().maxCoeff();
  for (std::size_t l = 0; l < n; ++l) {
    if (!std::isfinite(w.v[l]) || w.v[l] < 1.0 - 1e-12)
      throw NumericalError("weight solve violated v >= 1 at level " + std::to_string(l));
    w.alpha.push_back(w.v[l] / (1.0 - gammas[l]));
  }
  if (w.residual > 1e-10)
    throw NumericalError("weight solve residual " + format_double(w.residual) + " exceeds 1e-10");
  return w;
}

GainAnalysis analyze_gain(const Matrix& gain, std::span<const double> gammas) {
  GainAnalysis g;
  g.gain = gain;
  g.gammas.assign(gammas.begin(), gammas.end());
  g.rho = spectral_radius(gain);
  g.slack = 1.0 - g.rho;
  g.status = classify_radius(g.rho);
  if (g.status == SmallGain::safe) g.weights = neumann_weights(gammas, gain);
  return g;
}

GainAnalysis analyze_stack(const LevelStack& stack) {
  return analyze_gain(build_gain_matrix(stack), stack.gammas());
}

void write_gain_report(std::ostream& out, const GainAnalysis& g) {
  out << "levels=" << g.gain.rows() << '\n'
      << "spectral_radius=" << format_double(g.rho) << '\n'
      << "slack=" << format_double(g.slack) << '\n'
      << "small_gain=" << to_string(g.status) << '\n'
      << "gershgorin_bound=" << format_double(gershgorin_bound(g.gain)) << '\n';
  if (g.weights) {
    for (std::size_t l = 0; l < g.weights->v.size(); ++l)
      out << "v_" << l << '=' << format_double(g.weights->v[l]) << '\n'
          << "alpha_" << l << '=' << format_double(g.weights->alpha[l]) << '\n';
    out << "weight_residual=" << format_double(g.weights->residual) << '\n';
  } else {
    out << "weights=none\n";
  }
  out << "# gain matrix\n";
  for (std::size_t i = 0; i < g.gain.rows(); ++i) {
    for (std::size_t j = 0; j < g.gain.cols(); ++j)
      out << (j ? "," : "") << format_double(g.gain(i, j));
    out << '\n';
  }
}

JointLyapunovReport joint_lyapunov(const GainAnalysis& analysis, std::span<const double> times,
                                   std::span<const LevelSeries> levels, double tolerance) {
  if (!analysis.weights) throw ConfigError("joint Lyapunov check needs existing weights");
  const auto& alpha = analysis.weights->alpha;
  if (levels.size() != alpha.size())
    throw ConfigError("expected one series per level (" + std::to_string(alpha.size()) + ")");
  if (times.empty()) throw ConfigError("joint Lyapunov check needs a nonempty time grid");
  for (const auto& s : levels)
    if (s.mean_fitness.size() != times.size() || s.variance.size() != times.size())
      throw ConfigError("per-level series lengths do not match the time grid");

  JointLyapunovReport rep;
  std::vector<double> var_sum(times.size(), 0.0);
  rep.psi.assign(times.size(), 0.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (std::size_t l = 0; l < levels.size(); ++l) {
      rep.psi[k] += alpha[l] * levels[l].mean_fitness[k];
      var_sum[k] += levels[l].variance[k];
    }
  }
  rep.min_margin = times.size() > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t k = 0; k + 1 < times.size(); ++k) {
    const double dt = times[k + 1] - times[k];
    if (!(dt > 0.0)) throw ConfigError("time grid must be strictly increasing");
    const double dpsi = rep.psi[k + 1] - rep.psi[k];
    if (dpsi < -tolerance) rep.nondecreasing = false;
    const double margin = dpsi / dt - 0.5 * (var_sum[k] + var_sum[k + 1]);
    rep.min_margin = std::min(rep.min_margin, margin);
    if (margin < -tolerance) rep.violating_times.push_back(times[k]);
  }
  rep.monotone = rep.violating_times.empty();
  return rep;
}

BlockExtension extend_block(const GainAnalysis& base, std::span<const double> b,
                            std::span<const double> c, double gamma_new) {
  const std::size_t n = base.gain.rows();
  if (b.size() != n || c.size() != n)
    throw ConfigError("border vectors must have one entry per existing level");
  for (std::size_t i = 0; i < n; ++i)
    if (!(b[i] >= 0.0) || !(c[i] >= 0.0)) throw ConfigError("border gains must be >= 0");
  if (!base.weights) throw ConfigError("block extension needs a base stack with rho < 1");

  Matrix g(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) g(i, j) = base.gain(i, j);
    g(i, n) = b[i];
    g(n, i) = c[i];
  }
  auto gammas = base.gammas;
  gammas.push_back(gamma_new);

  BlockExtension ext;
  ext.base_slack = base.slack;
  const auto& v = base.weights->v;
  for (std::size_t i = 0; i < n; ++i) {
    ext.b_weighted = std::max(ext.b_weighted, b[i] / v[i]);
    ext.c_weighted += c[i] * v[i];
  }
  ext.theta_effective = std::max(ext.b_weighted, ext.c_weighted) / base.slack;
  ext.required_slack = (1.0 - ext.theta_effective) * base.slack;
  ext.condition_holds = ext.theta_effective < 1.0;
  ext.extended = analyze_gain(g, gammas);
  ext.slack_bound_ok = ext.condition_holds && ext.extended.slack >= ext.required_slack - 1e-12;
  return ext;
}

SlackBudget slack_budget(std::span<const double> thetas, double sigma0, double sigma_min) {
  if (!(sigma_min > 0.0) || !(sigma0 > sigma_min))
    throw ConfigError("slack budget needs sigma0 > sigma_min > 0");
  SlackBudget sb;
  sb.budget = std::log(sigma0 / sigma_min);
  for (double th : thetas) {
    if (!(th > 0.0 && th < 1.0)) throw ConfigError("extension costs theta must lie in (0, 1)");
    sb.costs.push_back(-std::log1p(-th));
    sb.total += sb.costs.back();
  }
  sb.remaining_slack = sigma0 * std::exp(-sb.total);
  sb.safe = sb.total <= sb.budget;
  return sb;
}

std::size_t safe_depth_uniform(double theta, double sigma0, double sigma_min) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0, 1)");
  if (!(sigma_min > 0.0) || !(sigma0 > sigma_min))
    throw ConfigError("slack budget needs sigma0 > sigma_min > 0");
  return static_cast<std::size_t>(std::floor(std::log(sigma0 / sigma_min) / theta));
}

AlignmentReport alignment_analysis(std::span<const std::vector<double>> gradients) {
  const std::size_t k = gradients.size();
  if (k == 0) throw ConfigError("alignment analysis needs at least one gradient");
  const std::size_t d = gradients[0].size();
  std::vector<double> norms(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (gradients[i].size() != d) throw ConfigError("gradients must share one dimension");
    double s = 0.0;
    for (double v : gradients[i]) s += v * v;
    norms[i] = std::sqrt(s);
    if (!(norms[i] > 0.0)) throw ConfigError("gradient " + std::to_string(i) + " is zero");
  }
  AlignmentReport rep{Matrix(k, k), 0.0};
  Eigen::MatrixXd a(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < d; ++t) s += gradients[i][t] * gradients[j][t];
      rep.alignment(i, j) = (i == j) ? 1.0 : s / (norms[i] * norms[j]);
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rep.alignment(i, j);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  return rep;
}

bool strong_alignment(const AlignmentReport& report, double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw ConfigError("alpha0 must lie in (0, 1]");
  return report.min_eigenvalue >= alpha0 - 1e-12;
}

double misalignment_hopf_threshold(double gamma1, double gamma2) {
  if (!(gamma1 >= 0.0 && gamma1 < 1.0) || !(gamma2 >= 0.0 && gamma2 < 1.0))
    throw ConfigError("channel gammas must lie in [0, 1)");
  return std::sqrt(gamma1 * gamma2 / ((1.0 - gamma1) * (1.0 - gamma2)));
}

}  // namespace tse::stack
