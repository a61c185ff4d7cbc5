#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference version and,
// on x86-64, an AVX2 version; the public entry points dispatch at runtime.
// The scalar versions define the semantics: integer kernels must agree
// bit-for-bit, floating-point reductions to rounding.

#include <cstddef>
#include <cstdint>
#include <span>

namespace ising_lwc::kernels {

enum class Isa { scalar, avx2 };

/// A pair of bit positions (spin indices) joined by an edge.
struct BitPair {
  std::uint32_t a;
  std::uint32_t b;
};

/// For each state s in [first, first + out.size()), writes the number of
/// pairs whose bits differ in s. State bit p set means spin p is +1.
void disagreement_counts(std::uint32_t first, std::span<const BitPair> pairs,
                         std::span<std::uint16_t> out);

/// Sum of |x[i] - y[i]|. Sizes must match.
double abs_diff_sum(std::span<const double> x, std::span<const double> y);

/// Sum of a ±1 spin array.
std::int64_t spin_sum(std::span<const std::int8_t> spins);

bool avx2_supported() noexcept;

/// The ISA the dispatcher currently routes to. Defaults to the best one the
/// CPU supports, unless ISING_LWC_ISA=scalar is set in the environment.
Isa active_isa() noexcept;

/// Overrides dispatch (tests and benchmarks). Requesting avx2 on a CPU
/// without it throws.
void force_isa(Isa isa);

const char* to_string(Isa isa) noexcept;

namespace scalar {
void disagreement_counts(std::uint32_t first, std::span<const BitPair> pairs,
                         std::span<std::uint16_t> out);
double abs_diff_sum(std::span<const double> x, std::span<const double> y);
std::int64_t spin_sum(std::span<const std::int8_t> spins);
}  // namespace scalar

#if defined(ISING_LWC_HAVE_AVX2)
namespace avx2 {
void disagreement_counts(std::uint32_t first, std::span<const BitPair> pairs,
                         std::span<std::uint16_t> out);
double abs_diff_sum(std::span<const double> x, std::span<const double> y);
std::int64_t spin_sum(std::span<const std::int8_t> spins);
}  // namespace avx2
#endif

}  // namespace ising_lwc::kernels
