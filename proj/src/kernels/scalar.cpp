#include "tse/kernels.hpp"

namespace tse::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void affine_matvec_scalar(const double* m, const double* offset, const double* x, double* y,
                          std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = m + r * cols;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * x[c];
    y[r] = offset ? offset[r] + s : s;
  }
}

double replicator_field_scalar(const double* x, const double* f, double* out, std::size_t n) {
  const double mean = dot_scalar(x, f, n);
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * (f[i] - mean);
  return mean;
}

void axpy_scalar(const double* a, double s, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + s * b[i];
}

void quartic_well_step_scalar(double* x, const double* noise, QuarticWell well, double dt,
                              std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double h = xi < 0.0 ? well.h_left : well.h_right;
    const double cubic = xi * (xi * xi - 1.0);
    const double drift = (-4.0 * h) * cubic;
    x[i] = (xi + drift * dt) + noise[i];
  }
}

constexpr KernelTable kScalar{dot_scalar, affine_matvec_scalar, replicator_field_scalar,
                              axpy_scalar, quartic_well_step_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace tse::kernels
