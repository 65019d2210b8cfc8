#pragma once

// Counter-based stream splitting: every (seed, run, purpose) triple maps to an
// independent 64-bit engine seed, so ensemble results do not depend on the
// order in which runs execute.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace tse {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum class StreamPurpose : std::uint64_t {
  escape = 1,
  imitation = 2,
  innovation = 3,
  pool = 4,
  occupancy = 5,
  property_test = 6,
};

constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t run,
                                    StreamPurpose purpose) noexcept {
  return splitmix64(splitmix64(seed ^ splitmix64(run)) + static_cast<std::uint64_t>(purpose));
}

/// Deterministic variate source. Uniforms and normals are derived here rather
/// than through <random> distributions, whose output is library-specific.
class Stream {
public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  Stream(std::uint64_t seed, std::uint64_t run, StreamPurpose purpose)
      : engine_(stream_seed(seed, run, purpose)) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double rate) { return -std::log(uniform_open_low()) / rate; }

  /// Standard normal via Box-Muller, caching the second variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * n); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tse
