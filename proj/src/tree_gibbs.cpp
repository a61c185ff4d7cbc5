#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "ising_lwc/error.hpp"
#include "ising_lwc/graph.hpp"
#include "ising_lwc/tree_gibbs.hpp"

namespace ising_lwc {

void validate(const IsingParams& p) {
  if (p.k < 3) throw Error(ErrorCode::invalid_argument, "k must be at least 3");
  if (!std::isfinite(p.beta) || p.beta < 0.0) {
    throw Error(ErrorCode::invalid_argument, "beta must be finite and non-negative");
  }
  if (!std::isfinite(p.field)) throw Error(ErrorCode::invalid_argument, "field must be finite");
}

double critical_beta(int k) {
  if (k < 3) throw Error(ErrorCode::invalid_argument, "k must be at least 3");
  return std::atanh(1.0 / (k - 1));
}

bool in_uniqueness_regime(const IsingParams& p) {
  return (p.k - 1) * std::tanh(p.beta) <= 1.0;
}

double cavity_message(double beta, double h) {
  if (std::isinf(h)) return std::copysign(beta, h);
  return std::atanh(std::tanh(beta) * std::tanh(h));
}

double fixed_point_map(const IsingParams& p, double h) {
  return (p.k - 1) * cavity_message(p.beta, h);
}

TreeFixedPoint solve_fixed_point(const IsingParams& p) {
  validate(p);
  if (p.field != 0.0) throw Error(ErrorCode::nonzero_field, "tree fixed point is defined for B = 0");
  TreeFixedPoint fp;
  fp.uniqueness = in_uniqueness_regime(p);
  if (fp.uniqueness) {
    // The only fixed point is 0; iterating would only approach it.
    fp.converged = true;
    return fp;
  }
  double h = p.k * p.beta;
  for (int s = 1; s <= fixed_point_max_iterations; ++s) {
    const double next = fixed_point_map(p, h);
    const double step = std::abs(next - h);
    h = next;
    fp.iterations = s;
    if (step < fixed_point_tolerance) {
      fp.converged = true;
      break;
    }
  }
  fp.h = h;
  fp.m = std::tanh(h);
  return fp;
}

double edge_correlation(const IsingParams& p) {
  const double m = solve_fixed_point(p).m;
  const double t = std::tanh(p.beta);
  return (t + m * m) / (1.0 + t * m * m);
}

double root_magnetization(const IsingParams& p) {
  const double m = solve_fixed_point(p).m;
  const double t = std::tanh(p.beta);
  return (m + t * m) / (1.0 + t * m * m);
}

double free_energy(const IsingParams& p) {
  const double m = solve_fixed_point(p).m;
  const double t = std::tanh(p.beta);
  const double k = p.k;
  return 0.5 * k * std::log(std::cosh(p.beta)) - 0.5 * k * std::log1p(t * m * m) +
         std::log(std::pow(1.0 + t * m, k) + std::pow(1.0 - t * m, k));
}

double pair_correlation(const IsingParams& p, int d) {
  if (d < 1) throw Error(ErrorCode::invalid_argument, "pair_correlation needs distance >= 1");
  const double h = solve_fixed_point(p).h;
  const double u = cavity_message(p.beta, h);
  // Path j_0 .. j_d: endpoints keep k-1 off-path subtrees (field h), interior
  // vertices keep k-2 (field h - u).
  auto field = [&](int i) { return (i == 0 || i == d) ? h : h - u; };
  // weight[a][b]: unnormalized mass of paths with x_0 = s(a), current spin s(b).
  auto spin = [](int idx) { return idx == 0 ? -1.0 : 1.0; };
  std::array<std::array<double, 2>, 2> weight{};
  for (int a = 0; a < 2; ++a) weight[a][a] = std::exp(field(0) * spin(a));
  for (int i = 1; i <= d; ++i) {
    std::array<std::array<double, 2>, 2> next{};
    double scale = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        double sum = 0.0;
        for (int c = 0; c < 2; ++c) sum += weight[a][c] * std::exp(p.beta * spin(c) * spin(b));
        next[a][b] = sum * std::exp(field(i) * spin(b));
        scale = std::max(scale, next[a][b]);
      }
    }
    for (auto& row : next) for (auto& w : row) w /= scale;
    weight = next;
  }
  double z = 0.0;
  double corr = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      z += weight[a][b];
      corr += spin(a) * spin(b) * weight[a][b];
    }
  }
  return corr / z;
}

namespace {

void check_delta(const IsingParams& p, double delta) {
  const double rho = root_magnetization(p);
  if (!(delta > 0.0 && delta < rho)) {
    throw Error(ErrorCode::invalid_argument, "delta must satisfy 0 < delta < rho = " + std::to_string(rho));
  }
}

// Spin-sum threshold: F = 1 iff sum <= -delta*|T|. Under the minus measure the
// event is the flip image of {sum >= delta*|T|} under plus.
bool f_event(double spin_sum, double size, double delta, PureBoundary b) {
  return b == PureBoundary::plus ? spin_sum <= -delta * size : spin_sum >= delta * size;
}

}  // namespace

double f_statistic_tree_exact(const IsingParams& p, PureBoundary boundary, int ell, double delta) {
  if (ell < 0) throw Error(ErrorCode::invalid_argument, "ell must be non-negative");
  check_delta(p, delta);
  const std::size_t size = tree_size(p.k, ell);
  if (size > max_table_spins) throw Error(ErrorCode::size_limit, "|T_k(ell)| exceeds the exact-table limit");
  const TreeMarginal plus = plus_limit_marginal(p, ell, Representation::table);
  const auto table = plus.table();
  const double n = static_cast<double>(size);
  double total = 0.0;
  for (std::size_t s = 0; s < table.size(); ++s) {
    const double sum = 2.0 * std::popcount(static_cast<std::uint32_t>(s)) - n;
    if (f_event(sum, n, delta, boundary)) total += table[s];
  }
  return std::clamp(total, 0.0, 1.0);
}

double f_statistic_tree_sampled(const IsingParams& p, PureBoundary boundary, int ell, double delta,
                                std::size_t nsamples, std::uint64_t seed) {
  if (ell < 0) throw Error(ErrorCode::invalid_argument, "ell must be non-negative");
  if (nsamples == 0) throw Error(ErrorCode::invalid_argument, "nsamples must be positive");
  check_delta(p, delta);
  const double h = solve_fixed_point(p).h;
  const double root_plus = 0.5 * (1.0 + std::tanh(p.k * cavity_message(p.beta, h)));
  // P(child = + | parent = s) = (1 + tanh(beta*s + h)) / 2.
  const double child_plus[2] = {0.5 * (1.0 + std::tanh(-p.beta + h)), 0.5 * (1.0 + std::tanh(p.beta + h))};
  const TreeShape shape(p.k, ell);
  const double n = static_cast<double>(shape.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::int8_t> spins(shape.size());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < nsamples; ++s) {
    spins[0] = unif(rng) < root_plus ? 1 : -1;
    long sum = spins[0];
    for (std::size_t v = 1; v < shape.size(); ++v) {
      const int parent_plus = spins[shape.parent(v)] > 0 ? 1 : 0;
      spins[v] = unif(rng) < child_plus[parent_plus] ? 1 : -1;
      sum += spins[v];
    }
    hits += f_event(static_cast<double>(sum), n, delta, boundary);
  }
  return static_cast<double>(hits) / static_cast<double>(nsamples);
}

double f_statistic_tree(const IsingParams& p, PureBoundary boundary, int ell, double delta,
                        std::size_t nsamples, std::uint64_t seed) {
  if (ell >= 0 && tree_size(p.k, ell) <= max_table_spins) {
    return f_statistic_tree_exact(p, boundary, ell, delta);
  }
  return f_statistic_tree_sampled(p, boundary, ell, delta, nsamples, seed);
}

double dlr_check(const IsingParams& p, int t, int t_plus) {
  if (t < 0 || t_plus <= t) throw Error(ErrorCode::invalid_argument, "dlr_check needs t_plus > t >= 0");
  // Joint law of the unfrozen spins T_k(t_plus - 1) under the plus boundary.
  const TreeMarginal joint = plus_boundary_marginal(p, t_plus - 1, t_plus, Representation::table);
  const auto table = joint.table();
  const TreeShape& shape = joint.shape();
  const std::size_t inner = shape.level_begin(t + 1);
  const std::size_t shell = shape.size() - inner;
  const bool next_level_frozen = t + 1 == t_plus;

  // Edges of T_k(t+1) touching the inner region, as (inner position, other).
  // Edges from depth t to depth t+1 use the shell spin, or +1 if frozen.
  std::vector<std::pair<std::size_t, std::size_t>> internal;
  for (std::size_t v = 1; v < inner; ++v) internal.emplace_back(shape.parent(v), v);
  const TreeShape outer(p.k, t + 1);
  std::vector<std::pair<std::size_t, std::size_t>> crossing;
  for (std::size_t v = inner; v < outer.size(); ++v) crossing.emplace_back(outer.parent(v), v);

  const std::size_t inner_states = std::size_t{1} << inner;
  std::vector<double> observed(inner_states);
  std::vector<double> ising(inner_states);
  auto spin_of = [](std::uint64_t config, std::size_t pos) { return (config >> pos) & 1U ? 1.0 : -1.0; };
  double worst = 0.0;
  for (std::uint64_t sh = 0; sh < (std::uint64_t{1} << shell); ++sh) {
    double z_obs = 0.0;
    double z_ising = 0.0;
    for (std::uint64_t x = 0; x < inner_states; ++x) {
      const std::uint64_t config = x | (sh << inner);
      observed[x] = table[config];
      z_obs += observed[x];
      double energy = 0.0;
      for (auto [a, b] : internal) energy += spin_of(config, a) * spin_of(config, b);
      for (auto [a, b] : crossing) {
        energy += spin_of(config, a) * (next_level_frozen ? 1.0 : spin_of(config, b));
      }
      ising[x] = std::exp(p.beta * energy);
      z_ising += ising[x];
    }
    double tv = 0.0;
    for (std::size_t x = 0; x < inner_states; ++x) tv += std::abs(observed[x] / z_obs - ising[x] / z_ising);
    worst = std::max(worst, 0.5 * tv);
  }
  return worst;
}

}  // namespace ising_lwc
