// Compiled with -mavx2 only; never called unless CPUID reports AVX2.
#include "tse/kernels.hpp"

#include <immintrin.h>

namespace tse::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void affine_matvec_avx2(const double* m, const double* offset, const double* x, double* y,
                        std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dot_avx2(m + r * cols, x, cols);
    y[r] = offset ? offset[r] + s : s;
  }
}

double replicator_field_avx2(const double* x, const double* f, double* out, std::size_t n) {
  const double mean = dot_avx2(x, f, n);
  const __m256d vm = _mm256_set1_pd(mean);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vf = _mm256_loadu_pd(f + i);
    _mm256_storeu_pd(out + i, _mm256_mul_pd(vx, _mm256_sub_pd(vf, vm)));
  }
  for (; i < n; ++i) out[i] = x[i] * (f[i] - mean);
  return mean;
}

void axpy_avx2(const double* a, double s, const double* b, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vb = _mm256_loadu_pd(b + i);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_mul_pd(vs, vb)));
  }
  for (; i < n; ++i) out[i] = a[i] + s * b[i];
}

void quartic_well_step_avx2(double* x, const double* noise, QuarticWell well, double dt,
                            std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d hl = _mm256_set1_pd(-4.0 * well.h_left);
  const __m256d hr = _mm256_set1_pd(-4.0 * well.h_right);
  const __m256d vdt = _mm256_set1_pd(dt);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xi = _mm256_loadu_pd(x + i);
    const __m256d left = _mm256_cmp_pd(xi, zero, _CMP_LT_OQ);
    const __m256d h = _mm256_blendv_pd(hr, hl, left);
    const __m256d cubic = _mm256_mul_pd(xi, _mm256_sub_pd(_mm256_mul_pd(xi, xi), one));
    const __m256d drift = _mm256_mul_pd(h, cubic);
    const __m256d next = _mm256_add_pd(_mm256_add_pd(xi, _mm256_mul_pd(drift, vdt)),
                                       _mm256_loadu_pd(noise + i));
    _mm256_storeu_pd(x + i, next);
  }
  for (; i < n; ++i) {
    const double xv = x[i];
    const double h = xv < 0.0 ? well.h_left : well.h_right;
    const double cubic = xv * (xv * xv - 1.0);
    const double drift = (-4.0 * h) * cubic;
    x[i] = (xv + drift * dt) + noise[i];
  }
}

constexpr KernelTable kAvx2{dot_avx2, affine_matvec_avx2, replicator_field_avx2, axpy_avx2,
                            quartic_well_step_avx2};

}  // namespace

const KernelTable* avx2_table() noexcept { return &kAvx2; }

}  // namespace tse::kernels
