#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tse/core.hpp"

namespace tse {

inline constexpr double kDefaultExtinctionThreshold = 1e-15;

/// A point on the probability simplex. Shares below the extinction threshold
/// are clamped to zero and the remainder renormalized on construction and on
/// every call to renormalize().
class PopulationState {
public:
  explicit PopulationState(std::vector<double> shares,
                           double extinction_threshold = kDefaultExtinctionThreshold);

  static PopulationState uniform(std::size_t n);
  static PopulationState vertex(std::size_t n, std::size_t i);

  std::size_t size() const noexcept { return shares_.size(); }
  std::span<const double> shares() const noexcept { return shares_; }
  double operator[](std::size_t i) const { return shares_[i]; }
  double extinction_threshold() const noexcept { return threshold_; }

  /// Indices with share strictly above the extinction threshold.
  std::vector<std::size_t> support() const;
  bool in_support(std::size_t i) const { return shares_[i] > threshold_; }

private:
  std::vector<double> shares_;
  double threshold_;
};

/// Clamp entries below the threshold (and negatives) to zero, then rescale to
/// sum to one. Throws NumericalError on non-finite or all-zero input.
void renormalize_simplex(std::span<double> x, double extinction_threshold);

/// Frequency-dependent fitness. Linear models are f(x) = offset + payoff * x;
/// general models wrap a callback with an optional analytic Jacobian and fall
/// back to central finite differences.
class FitnessModel {
public:
  using Callback = std::function<void(std::span<const double> x, std::span<double> f)>;
  /// Fills jac(j, k) = d f_j / d x_k.
  using JacobianCallback = std::function<void(std::span<const double> x, Matrix& jac)>;

  static FitnessModel linear(Matrix payoff, std::vector<double> offset = {});
  static FitnessModel general(std::size_t dimension, Callback fitness,
                              JacobianCallback jacobian = {}, double fd_step = 1e-6);

  std::size_t dimension() const noexcept { return dim_; }
  bool is_linear() const noexcept { return linear_; }
  const Matrix& payoff() const;
  std::span<const double> offset() const noexcept { return offset_; }

  void evaluate(std::span<const double> x, std::span<double> out) const;
  std::vector<double> evaluate(std::span<const double> x) const;
  Matrix jacobian(std::span<const double> x) const;

private:
  FitnessModel() = default;

  std::size_t dim_ = 0;
  bool linear_ = false;
  Matrix payoff_;
  std::vector<double> offset_;
  Callback fitness_;
  JacobianCallback jacobian_;
  double fd_step_ = 1e-6;
};

}  // namespace tse
