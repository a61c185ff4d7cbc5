#include <atomic>
#include <cstdlib>
#include <cstring>

#include "ising_lwc/error.hpp"
#include "ising_lwc/kernels.hpp"

namespace ising_lwc::kernels {
namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("ISING_LWC_ISA"); env && std::strcmp(env, "scalar") == 0) {
    return Isa::scalar;
  }
  return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_supported() noexcept {
#if defined(ISING_LWC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2_supported()) {
    throw Error(ErrorCode::invalid_argument, "AVX2 requested but not supported by this CPU/build");
  }
  current().store(isa, std::memory_order_relaxed);
}

const char* to_string(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void disagreement_counts(std::uint32_t first, std::span<const BitPair> pairs,
                         std::span<std::uint16_t> out) {
#if defined(ISING_LWC_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::disagreement_counts(first, pairs, out);
#endif
  scalar::disagreement_counts(first, pairs, out);
}

double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
#if defined(ISING_LWC_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::abs_diff_sum(x, y);
#endif
  return scalar::abs_diff_sum(x, y);
}

std::int64_t spin_sum(std::span<const std::int8_t> spins) {
#if defined(ISING_LWC_HAVE_AVX2)
  if (active_isa() == Isa::avx2) return avx2::spin_sum(spins);
#endif
  return scalar::spin_sum(spins);
}

}  // namespace ising_lwc::kernels
