#include "tse/core.hpp"
#include "tse/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace tse::kernels {

#if !defined(TSE_HAVE_AVX2)
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() noexcept {
#if defined(TSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  const bool avx2 = cpu_has_avx2() && avx2_table() != nullptr;
  if (const char* env = std::getenv("TSE_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && avx2) return Backend::avx2;
  }
  return avx2 ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

bool avx2_available() noexcept { return cpu_has_avx2() && avx2_table() != nullptr; }

Backend active_backend() noexcept { return current().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_available())
    throw ConfigError("AVX2 backend requested but not supported on this CPU");
  current().store(b, std::memory_order_relaxed);
}

std::string_view backend_name(Backend b) noexcept {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable& active() noexcept {
  return active_backend() == Backend::avx2 ? *avx2_table() : scalar_table();
}

}  // namespace tse::kernels
