#include <cstdlib>

#include "ising_lwc/error.hpp"
#include "ising_lwc/kernels.hpp"

namespace ising_lwc::kernels::scalar {

void disagreement_counts(std::uint32_t first, std::span<const BitPair> pairs,
                         std::span<std::uint16_t> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto s = static_cast<std::uint32_t>(first + i);
    std::uint16_t d = 0;
    for (const auto& p : pairs) d += ((s >> p.a) ^ (s >> p.b)) & 1U;
    out[i] = d;
  }
}

double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::invalid_argument, "abs_diff_sum: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += std::abs(x[i] - y[i]);
  return total;
}

std::int64_t spin_sum(std::span<const std::int8_t> spins) {
  std::int64_t total = 0;
  for (std::int8_t s : spins) total += s;
  return total;
}

}  // namespace ising_lwc::kernels::scalar
