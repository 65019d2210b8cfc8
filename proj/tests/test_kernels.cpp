#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "tse/core.hpp"
#include "tse/kernels.hpp"
#include "tse/rng.hpp"

using namespace tse;
using namespace tse::kernels;

namespace {

std::vector<double> random_vector(Stream& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Lengths straddling the 4-wide vector width and its remainder handling.
constexpr std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 101};

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  const auto& s = scalar_table();
  Stream rng(71, 0, StreamPurpose::property_test);
  for (std::size_t n : kLengths) {
    const auto a = random_vector(rng, n, -2, 2), b = random_vector(rng, n, -2, 2);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += a[i] * b[i];
    CHECK(s.dot(a.data(), b.data(), n) == doctest::Approx(d).epsilon(1e-13));

    std::vector<double> out(n), ref(n);
    s.axpy(a.data(), 0.37, b.data(), out.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == a[i] + 0.37 * b[i]);

    if (n == 0) continue;
    auto x = random_vector(rng, n, 0.0, 1.0);
    double total = 0.0;
    for (double v : x) total += v;
    for (double& v : x) v /= total;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x[i] * a[i];
    CHECK(s.replicator_field(x.data(), a.data(), out.data(), n) == doctest::Approx(mean).epsilon(1e-13));
    for (std::size_t i = 0; i < n; ++i) CHECK(out[i] == doctest::Approx(x[i] * (a[i] - mean)).epsilon(1e-12));

    const std::size_t rows = 1 + rng.below(9);
    const auto m = random_vector(rng, rows * n, -1, 1), off = random_vector(rng, rows, -1, 1);
    std::vector<double> y(rows);
    s.affine_matvec(m.data(), off.data(), a.data(), y.data(), rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = off[r];
      for (std::size_t c = 0; c < n; ++c) acc += m[r * n + c] * a[c];
      CHECK(y[r] == doctest::Approx(acc).epsilon(1e-13));
    }
    s.affine_matvec(m.data(), nullptr, a.data(), y.data(), rows, n);
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) acc += m[r * n + c] * a[c];
      CHECK(y[r] == doctest::Approx(acc).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("quartic well step: scalar reference") {
  const QuarticWell w{0.3, 0.7};
  std::vector<double> x{-1.5, -1.0, -0.2, 0.0, 0.4, 1.0, 1.3}, noise(x.size(), 0.01);
  const auto before = x;
  scalar_table().quartic_well_step(x.data(), noise.data(), w, 0.05, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = before[i] < 0.0 ? w.h_left : w.h_right;
    const double drift = -4.0 * h * before[i] * (before[i] * before[i] - 1.0);
    CHECK(x[i] == doctest::Approx(before[i] + drift * 0.05 + 0.01).epsilon(1e-14));
  }
}

TEST_CASE("avx2 backend equivalence") {
  const auto* v = avx2_table();
  if (!v || !avx2_available()) {
    MESSAGE("AVX2 unavailable; equivalence skipped");
    return;
  }
  const auto& s = scalar_table();
  Stream rng(72, 0, StreamPurpose::property_test);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = kLengths[trial % std::size(kLengths)] + rng.below(3);
    const auto a = random_vector(rng, n, -3, 3), b = random_vector(rng, n, -3, 3);
    // Reductions: summation order differs, so compare with a rounding bound.
    double bound = 0.0;
    for (std::size_t i = 0; i < n; ++i) bound += std::abs(a[i] * b[i]);
    CHECK(std::abs(v->dot(a.data(), b.data(), n) - s.dot(a.data(), b.data(), n)) <=
          4.0 * static_cast<double>(n + 1) * 0x1.0p-53 * bound);

    std::vector<double> o1(n), o2(n);
    s.axpy(a.data(), -1.25, b.data(), o1.data(), n);
    v->axpy(a.data(), -1.25, b.data(), o2.data(), n);
    CHECK(bitwise_equal(o1, o2));

    if (n > 0) {
      auto x = random_vector(rng, n, 0.0, 1.0);
      double total = 0.0;
      for (double q : x) total += q;
      for (double& q : x) q /= total;
      const double m1 = s.replicator_field(x.data(), a.data(), o1.data(), n);
      const double m2 = v->replicator_field(x.data(), a.data(), o2.data(), n);
      CHECK(m1 == doctest::Approx(m2).epsilon(1e-13).scale(3.0));
      for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(o1[i] - o2[i]) <= 1e-14 * (1.0 + std::abs(x[i])));
    }

    const std::size_t rows = 1 + rng.below(7);
    const auto m = random_vector(rng, rows * n, -1, 1), off = random_vector(rng, rows, -1, 1);
    std::vector<double> y1(rows), y2(rows);
    s.affine_matvec(m.data(), off.data(), a.data(), y1.data(), rows, n);
    v->affine_matvec(m.data(), off.data(), a.data(), y2.data(), rows, n);
    for (std::size_t r = 0; r < rows; ++r) CHECK(std::abs(y1[r] - y2[r]) <= 1e-13 * (1.0 + n));

    auto w1 = random_vector(rng, n, -2, 2), w2 = w1;
    const auto noise = random_vector(rng, n, -0.05, 0.05);
    const QuarticWell well{rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)};
    s.quartic_well_step(w1.data(), noise.data(), well, 0.01, n);
    v->quartic_well_step(w2.data(), noise.data(), well, 0.01, n);
    CHECK(bitwise_equal(w1, w2));
  }
}

TEST_CASE("backend selection") {
  const auto prev = active_backend();
  set_backend(Backend::scalar);
  CHECK(active_backend() == Backend::scalar);
  CHECK(&active() == &scalar_table());
  CHECK(backend_name(Backend::scalar) == "scalar");
  CHECK(backend_name(Backend::avx2) == "avx2");
  if (avx2_available()) {
    set_backend(Backend::avx2);
    CHECK(active_backend() == Backend::avx2);
  } else {
    CHECK_THROWS_AS(set_backend(Backend::avx2), ConfigError);
  }
  set_backend(prev);
}
