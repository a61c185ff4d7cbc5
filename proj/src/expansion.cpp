#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>

#include "ising_lwc/error.hpp"
#include "ising_lwc/graph.hpp"

namespace ising_lwc {
namespace {

ExpansionReport exact_expansion(const RegularGraph& g, double gamma) {
  const std::size_t n = g.num_vertices();
  if (n > max_exact_expansion_vertices) {
    throw Error(ErrorCode::size_limit, "exact expansion needs n <= 24");
  }
  const auto max_size = static_cast<std::size_t>(std::floor(gamma * static_cast<double>(n) + 1e-12));
  if (max_size == 0) throw Error(ErrorCode::invalid_argument, "gamma*n < 1 leaves no subsets");

  std::vector<std::uint32_t> adjacency_mask(n, 0);
  for (const auto& e : g.edges()) {
    adjacency_mask[e.u] |= 1U << e.v;
    adjacency_mask[e.v] |= 1U << e.u;
  }
  // Track the best ratio as a fraction to avoid rounding ties.
  std::uint64_t best_boundary = 1;
  std::uint64_t best_size = 0;
  std::uint32_t best_mask = 0;
  const std::uint64_t limit = std::uint64_t{1} << n;
  for (std::uint64_t s = 1; s < limit; ++s) {
    const auto mask = static_cast<std::uint32_t>(s);
    const auto size = static_cast<std::uint64_t>(std::popcount(mask));
    if (size > max_size) continue;
    std::uint64_t boundary = 0;
    for (std::uint32_t rest = mask; rest != 0; rest &= rest - 1) {
      boundary += std::popcount(adjacency_mask[std::countr_zero(rest)] & ~mask);
    }
    if (best_size == 0 || boundary * best_size < best_boundary * size) {
      best_boundary = boundary;
      best_size = size;
      best_mask = mask;
    }
  }
  ExpansionReport report;
  report.gamma = gamma;
  report.method = ExpansionMethod::exact;
  report.lambda = static_cast<double>(best_boundary) / static_cast<double>(best_size);
  std::vector<Vertex> witness;
  for (Vertex v = 0; v < n; ++v) {
    if (best_mask & (1U << v)) witness.push_back(v);
  }
  report.witness = std::move(witness);
  return report;
}

}  // namespace

double second_adjacency_eigenvalue(const RegularGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  if (g.num_vertices() > max_spectral_expansion_vertices) {
    throw Error(ErrorCode::size_limit, "spectral bound uses a dense eigensolver; n <= 2048");
  }
  if (n < 2) throw Error(ErrorCode::invalid_argument, "need at least two vertices");
  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    adjacency(e.u, e.v) = 1.0;
    adjacency(e.v, e.u) = 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(adjacency, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::invalid_argument, "eigensolver did not converge");
  }
  return solver.eigenvalues()(n - 2);  // ascending order
}

ExpansionReport expansion_lower_bound(const RegularGraph& g, double gamma,
                                      ExpansionMethod method) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorCode::invalid_argument, "gamma must lie in (0,1]");
  if (method == ExpansionMethod::exact) return exact_expansion(g, gamma);

  const double k = g.degree();
  // Inflate lambda_2 by a few ulps of the spectral radius so the bound stays
  // certified under eigensolver rounding.
  const double lambda2 = second_adjacency_eigenvalue(g) + 64.0 * k * 1e-15 * static_cast<double>(g.num_vertices());
  ExpansionReport report;
  report.gamma = gamma;
  report.method = ExpansionMethod::spectral;
  report.lambda = std::max(0.0, (k - lambda2) * (1.0 - gamma));
  return report;
}

}  // namespace ising_lwc
