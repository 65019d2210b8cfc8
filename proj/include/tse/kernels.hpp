#pragma once

// Inner-loop arithmetic used by the integrators. Every kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant; the active
// backend is chosen once at startup from CPUID and can be forced with the
// TSE_SIMD environment variable ("scalar" or "avx2") or set_backend().
//
// Element-wise kernels are bitwise identical across backends (no FMA
// contraction on either side). Reductions differ only in summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace tse::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend() noexcept;
bool avx2_available() noexcept;
/// Throws ConfigError when the requested backend is not supported by this CPU.
void set_backend(Backend b);
std::string_view backend_name(Backend b) noexcept;

/// Piecewise quartic double well used by the escape-time lab:
///   V(x) = h_left  * ((x^2-1)^2 - 1)  for x < 0
///   V(x) = h_right * ((x^2-1)^2 - 1)  for x >= 0
/// drift = -V'(x) = -4 h x (x^2 - 1) with h chosen by the sign of x.
struct QuarticWell {
  double h_left;
  double h_right;
};

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[r] = offset[r] + sum_c m[r*cols + c] * x[c]; offset may be null.
  void (*affine_matvec)(const double* m, const double* offset, const double* x, double* y,
                        std::size_t rows, std::size_t cols);
  /// out[i] = x[i] * (f[i] - mean), mean = sum x[i] f[i]; returns mean.
  double (*replicator_field)(const double* x, const double* f, double* out, std::size_t n);
  /// out[i] = a[i] + s * b[i]
  void (*axpy)(const double* a, double s, const double* b, double* out, std::size_t n);
  /// One Euler-Maruyama step for n walkers in the quartic well:
  /// x[i] += drift(x[i]) * dt + noise[i]  (noise already scaled by sqrt(sigma*dt)).
  void (*quartic_well_step)(double* x, const double* noise, QuarticWell well, double dt,
                            std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_table() noexcept;
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double replicator_field(std::span<const double> x, std::span<const double> f,
                               std::span<double> out) {
  return active().replicator_field(x.data(), f.data(), out.data(), x.size());
}

inline void axpy(std::span<const double> a, double s, std::span<const double> b,
                 std::span<double> out) {
  active().axpy(a.data(), s, b.data(), out.data(), a.size());
}

}  // namespace tse::kernels
