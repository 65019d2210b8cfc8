#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tse/core.hpp"

namespace tse::stack {

/// Raised when positive Lyapunov weights are requested for a stack whose gain
/// matrix violates the small-gain condition.
class WeightNonexistenceError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

struct Level {
  double gamma_self = 0.0;  ///< within-level externality bound, must be < 1
  std::string label;
};

struct LevelStack {
  std::vector<Level> levels;
  /// cross_beta(l, m): externality bound from level m onto level l. Zero diagonal.
  Matrix cross_beta;

  void validate() const;
  std::vector<double> gammas() const;
};

Matrix build_gain_matrix(const LevelStack& stack);

/// Spectral radius of a nonnegative matrix. Each strongly connected block is
/// handled by shifted power iteration with Collatz-Wielandt bracketing, so
/// reducible and nilpotent couplings converge as well.
double spectral_radius(const Matrix& m, double tol = 1e-12, std::size_t max_iter = 100000);

/// Largest row sum: an upper bound on the spectral radius of a nonnegative matrix.
double gershgorin_bound(const Matrix& m);

enum class SmallGain { safe, critical, failed };
SmallGain classify_radius(double rho);
const char* to_string(SmallGain s);

struct NeumannWeights {
  std::vector<double> v;      ///< solves (I - Gamma^T) v = 1
  std::vector<double> alpha;  ///< v_l / (1 - gamma_l)
  double residual = 0.0;      ///< inf-norm of (I - Gamma^T) v - 1
};

NeumannWeights neumann_weights(std::span<const double> gammas, const Matrix& gain);

struct GainAnalysis {
  Matrix gain;
  std::vector<double> gammas;
  double rho = 0.0;
  double slack = 1.0;
  SmallGain status = SmallGain::safe;
  std::optional<NeumannWeights> weights;
};

GainAnalysis analyze_gain(const Matrix& gain, std::span<const double> gammas);
GainAnalysis analyze_stack(const LevelStack& stack);

/// Key-value block followed by the gain matrix as CSV rows.
void write_gain_report(std::ostream& out, const GainAnalysis& g);

struct LevelSeries {
  std::vector<double> mean_fitness;
  std::vector<double> variance;
};

struct JointLyapunovReport {
  std::vector<double> psi;
  bool nondecreasing = true;  ///< Psi never drops by more than tolerance
  bool monotone = true;       ///< d Psi/dt >= sum of variances up to tolerance
  double min_margin = 0.0;
  std::vector<double> violating_times;
};

/// Evaluates Psi = sum alpha_l mean_l along synchronized per-level series and
/// checks d Psi/dt >= sum_l Var_l between samples.
JointLyapunovReport joint_lyapunov(const GainAnalysis& analysis, std::span<const double> times,
                                   std::span<const LevelSeries> levels, double tolerance = 1e-9);

struct BlockExtension {
  GainAnalysis extended;
  double base_slack = 0.0;
  double b_weighted = 0.0;    ///< max_l b_l / v_l
  double c_weighted = 0.0;    ///< sum_l c_l v_l
  double theta_effective = 0.0;
  double required_slack = 0.0;  ///< (1 - theta) * sigma
  bool condition_holds = false; ///< theta_effective < 1
  bool slack_bound_ok = false;  ///< condition holds and realized slack >= required
};

/// Borders the gain matrix with a new level: b = gains from the new level onto
/// the old ones, c = gains from the old levels onto the new one.
BlockExtension extend_block(const GainAnalysis& base, std::span<const double> b_new_to_old,
                            std::span<const double> c_old_to_new, double gamma_new = 0.0);

struct SlackBudget {
  std::vector<double> costs;  ///< s_k = -ln(1 - theta_k)
  double total = 0.0;
  double budget = 0.0;        ///< ln(sigma0 / sigma_min)
  double remaining_slack = 0.0;
  bool safe = true;
};

SlackBudget slack_budget(std::span<const double> thetas, double sigma0, double sigma_min);
/// floor(ln(sigma0/sigma_min) / theta)
std::size_t safe_depth_uniform(double theta, double sigma0, double sigma_min);

struct AlignmentReport {
  Matrix alignment;
  double min_eigenvalue = 0.0;
};

AlignmentReport alignment_analysis(std::span<const std::vector<double>> gradients);
bool strong_alignment(const AlignmentReport& report, double alpha0);
/// |A_12| threshold above which two bilinearly coupled channels undergo a Hopf bifurcation.
double misalignment_hopf_threshold(double gamma1, double gamma2);

}  // namespace tse::stack
