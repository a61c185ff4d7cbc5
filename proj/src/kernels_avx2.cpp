// Compiled with -mavx2; only reached through the runtime dispatcher.
#include <immintrin.h>

#include <algorithm>

#include "ising_lwc/error.hpp"
#include "ising_lwc/kernels.hpp"

namespace ising_lwc::kernels::avx2 {

void disagreement_counts(std::uint32_t first, std::span<const BitPair> pairs,
                         std::span<std::uint16_t> out) {
  const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);
  const __m256i one = _mm256_set1_epi32(1);
  std::size_t i = 0;
  alignas(32) std::uint32_t tmp[8];
  for (; i + 8 <= out.size(); i += 8) {
    const __m256i states =
        _mm256_add_epi32(_mm256_set1_epi32(static_cast<int>(first + i)), lane);
    __m256i d = _mm256_setzero_si256();
    for (const auto& p : pairs) {
      const __m256i xa = _mm256_srl_epi32(states, _mm_cvtsi32_si128(static_cast<int>(p.a)));
      const __m256i xb = _mm256_srl_epi32(states, _mm_cvtsi32_si128(static_cast<int>(p.b)));
      d = _mm256_add_epi32(d, _mm256_and_si256(_mm256_xor_si256(xa, xb), one));
    }
    _mm256_store_si256(reinterpret_cast<__m256i*>(tmp), d);
    for (int j = 0; j < 8; ++j) out[i + j] = static_cast<std::uint16_t>(tmp[j]);
  }
  if (i < out.size()) {
    scalar::disagreement_counts(static_cast<std::uint32_t>(first + i), pairs, out.subspan(i));
  }
}

double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "abs_diff_sum: size mismatch");
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= x.size(); i += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i), _mm256_loadu_pd(y.data() + i));
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(x.data() + i + 4), _mm256_loadu_pd(y.data() + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_andnot_pd(sign, d1));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, _mm256_add_pd(acc0, acc1));
  double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  return total + scalar::abs_diff_sum(x.subspan(i), y.subspan(i));
}

std::int64_t spin_sum(std::span<const std::int8_t> spins) {
  // Widen int8 -> int16 sums in blocks small enough that int16 cannot
  // overflow (each lane gains at most 2 per iteration), then flush to int64.
  std::int64_t total = 0;
  std::size_t i = 0;
  const __m256i ones16 = _mm256_set1_epi16(1);
  while (i + 32 <= spins.size()) {
    __m256i acc = _mm256_setzero_si256();
    const std::size_t block_end = std::min(spins.size() - spins.size() % 32, i + 32 * 8192);
    for (; i < block_end; i += 32) {
      const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(spins.data() + i));
      const __m256i lo = _mm256_cvtepi8_epi16(_mm256_castsi256_si128(v));
      const __m256i hi = _mm256_cvtepi8_epi16(_mm256_extracti128_si256(v, 1));
      acc = _mm256_add_epi16(acc, _mm256_add_epi16(lo, hi));
    }
    const __m256i wide = _mm256_madd_epi16(acc, ones16);
    alignas(32) std::int32_t lanes[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), wide);
    for (std::int32_t lane_sum : lanes) total += lane_sum;
  }
  return total + scalar::spin_sum(spins.subspan(i));
}

}  // namespace ising_lwc::kernels::avx2
