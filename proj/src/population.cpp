#include "tse/population.hpp"

#include <cmath>
#include <string>

#include "tse/kernels.hpp"

namespace tse {

void renormalize_simplex(std::span<double> x, double extinction_threshold) {
  double sum = 0.0;
  for (double& v : x) {
    if (!std::isfinite(v)) throw NumericalError("non-finite share in population state");
    if (v <= extinction_threshold) v = 0.0;
    sum += v;
  }
  if (!(sum > 0.0)) throw NumericalError("population state has no positive share");
  for (double& v : x) v /= sum;
}

PopulationState::PopulationState(std::vector<double> shares, double extinction_threshold)
    : shares_(std::move(shares)), threshold_(extinction_threshold) {
  if (shares_.empty()) throw ConfigError("population state must have at least one type");
  if (!(threshold_ >= 0.0)) throw ConfigError("extinction threshold must be nonnegative");
  double sum = 0.0;
  for (double v : shares_) {
    if (!std::isfinite(v) || v < 0.0)
      throw ConfigError("population shares must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw ConfigError("population shares must sum to 1 (got " + format_double(sum) + ")");
  renormalize_simplex(shares_, threshold_);
}

PopulationState PopulationState::uniform(std::size_t n) {
  if (n == 0) throw ConfigError("population state must have at least one type");
  return PopulationState(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

PopulationState PopulationState::vertex(std::size_t n, std::size_t i) {
  if (i >= n) throw ConfigError("vertex index out of range");
  std::vector<double> x(n, 0.0);
  x[i] = 1.0;
  return PopulationState(std::move(x));
}

std::vector<std::size_t> PopulationState::support() const {
  std::vector<std::size_t> s;
  for (std::size_t i = 0; i < shares_.size(); ++i)
    if (shares_[i] > threshold_) s.push_back(i);
  return s;
}

FitnessModel FitnessModel::linear(Matrix payoff, std::vector<double> offset) {
  if (!payoff.square() || payoff.rows() == 0)
    throw ConfigError("linear fitness model needs a nonempty square payoff matrix");
  if (!offset.empty() && offset.size() != payoff.rows())
    throw ConfigError("fitness offset length must match payoff dimension");
  FitnessModel m;
  m.dim_ = payoff.rows();
  m.linear_ = true;
  m.payoff_ = std::move(payoff);
  m.offset_ = std::move(offset);
  return m;
}

FitnessModel FitnessModel::general(std::size_t dimension, Callback fitness,
                                   JacobianCallback jacobian, double fd_step) {
  if (dimension == 0) throw ConfigError("fitness model dimension must be positive");
  if (!fitness) throw ConfigError("general fitness model needs a fitness callback");
  if (!(fd_step > 0.0)) throw ConfigError("finite-difference step must be positive");
  FitnessModel m;
  m.dim_ = dimension;
  m.fitness_ = std::move(fitness);
  m.jacobian_ = std::move(jacobian);
  m.fd_step_ = fd_step;
  return m;
}

const Matrix& FitnessModel::payoff() const {
  if (!linear_) throw ConfigError("payoff matrix requested from a non-linear fitness model");
  return payoff_;
}

void FitnessModel::evaluate(std::span<const double> x, std::span<double> out) const {
  if (x.size() != dim_ || out.size() != dim_)
    throw ConfigError("fitness model dimension " + std::to_string(dim_) +
                      " does not match state dimension " + std::to_string(x.size()));
  if (linear_) {
    kernels::active().affine_matvec(payoff_.data().data(),
                                    offset_.empty() ? nullptr : offset_.data(), x.data(),
                                    out.data(), dim_, dim_);
  } else {
    fitness_(x, out);
  }
}

std::vector<double> FitnessModel::evaluate(std::span<const double> x) const {
  std::vector<double> f(dim_);
  evaluate(x, f);
  return f;
}

Matrix FitnessModel::jacobian(std::span<const double> x) const {
  if (x.size() != dim_) throw ConfigError("fitness model dimension mismatch");
  if (linear_) return payoff_;
  Matrix jac(dim_, dim_);
  if (jacobian_) {
    jacobian_(x, jac);
    return jac;
  }
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> xm(x.begin(), x.end());
  std::vector<double> fp(dim_), fm(dim_);
  for (std::size_t k = 0; k < dim_; ++k) {
    xp[k] = x[k] + fd_step_;
    xm[k] = x[k] - fd_step_;
    fitness_(xp, fp);
    fitness_(xm, fm);
    for (std::size_t j = 0; j < dim_; ++j) jac(j, k) = (fp[j] - fm[j]) / (2.0 * fd_step_);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return jac;
}

}  // namespace tse
