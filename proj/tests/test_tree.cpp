#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ising_lwc/error.hpp"
#include "ising_lwc/graph.hpp"
#include "ising_lwc/tree_gibbs.hpp"

using namespace ising_lwc;

namespace {

// Partition-function recursion on T_k(depth) with the deepest layer pinned
// to +1. No cavity fields involved: z[s] is the subtree weight given its
// top spin s (index 0 = minus, 1 = plus), renormalized at every level.
struct PinnedTree {
  double root_mean = 0.0;
  double edge_moment = 0.0;
};

PinnedTree pinned_tree(int k, double beta, int depth) {
  double z[2] = {0.0, 1.0};
  const double spin[2] = {-1.0, 1.0};
  auto lift = [&](const double child[2]) {
    double out[2];
    for (int s = 0; s < 2; ++s) out[s] = std::exp(-beta * spin[s]) * child[0] + std::exp(beta * spin[s]) * child[1];
    return std::pair{out[0], out[1]};
  };
  for (int d = depth - 1; d >= 1; --d) {
    auto [m, p] = lift(z);
    double zm = std::pow(m, k - 1);
    double zp = std::pow(p, k - 1);
    z[0] = zm / (zm + zp);
    z[1] = zp / (zm + zp);
  }
  // z now describes a depth-1 vertex subtree (k-1 children below it).
  auto [m, p] = lift(z);
  PinnedTree out;
  const double root_m = std::pow(m, k);
  const double root_p = std::pow(p, k);
  out.root_mean = (root_p - root_m) / (root_p + root_m);
  const double rest[2] = {std::pow(m, k - 1), std::pow(p, k - 1)};
  double num = 0.0;
  double den = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double w = rest[a] * std::exp(beta * spin[a] * spin[b]) * z[b];
      num += spin[a] * spin[b] * w;
      den += w;
    }
  }
  out.edge_moment = num / den;
  return out;
}

double bisect_fixed_point(int k, double beta) {
  auto g = [&](double h) { return (k - 1) * std::atanh(std::tanh(beta) * std::tanh(h)) - h; };
  double lo = 1e-3;
  double hi = k * beta + 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double table_vertex_mean(std::span<const double> table, std::size_t pos) {
  double m = 0.0;
  for (std::size_t s = 0; s < table.size(); ++s) m += ((s >> pos) & 1U ? 1.0 : -1.0) * table[s];
  return m;
}

double table_edge_moment(std::span<const double> table, std::size_t a, std::size_t b) {
  double m = 0.0;
  for (std::size_t s = 0; s < table.size(); ++s) m += (((s >> a) ^ (s >> b)) & 1U ? -1.0 : 1.0) * table[s];
  return m;
}

}  // namespace

TEST_CASE("fixed point: uniqueness regime is exactly zero") {
  for (int k : {3, 4, 5}) {
    for (double beta : {0.0, 0.1, 0.5 * critical_beta(k), critical_beta(k)}) {
      const auto fp = solve_fixed_point({k, beta, 0.0});
      CHECK(fp.h == 0.0);
      CHECK(fp.uniqueness);
      CHECK(fp.converged);
    }
  }
  CHECK(critical_beta(3) == doctest::Approx(0.5493061443340548).epsilon(1e-15));
}

TEST_CASE("fixed point: matches a bisection oracle") {
  for (int k : {3, 4, 5}) {
    for (double beta : {0.6, 0.8, 1.0, 1.5, 2.0}) {
      const IsingParams p{k, beta, 0.0};
      if (in_uniqueness_regime(p)) continue;
      const auto fp = solve_fixed_point(p);
      CHECK(fp.converged);
      CHECK(std::abs(fp.h - bisect_fixed_point(k, beta)) < 1e-10);
      CHECK(fp.m == std::tanh(fp.h));
    }
  }
  const auto fp = solve_fixed_point({3, 1.0, 0.0});
  CHECK(fp.h == doctest::Approx(1.8291361594238373).epsilon(1e-12));
}

TEST_CASE("fixed point: argument validation") {
  CHECK_THROWS_AS(solve_fixed_point({3, 1.0, 0.1}), Error);
  CHECK_THROWS_AS(solve_fixed_point({2, 1.0, 0.0}), Error);
  CHECK_THROWS_AS(solve_fixed_point({3, -0.1, 0.0}), Error);
  CHECK_THROWS_AS(solve_fixed_point({3, NAN, 0.0}), Error);
}

TEST_CASE("closed forms agree with the pinned finite tree") {
  for (int k : {3, 4}) {
    for (double beta : {0.7, 1.0, 1.5}) {
      const IsingParams p{k, beta, 0.0};
      const auto deep = pinned_tree(k, beta, 60);
      CHECK(std::abs(root_magnetization(p) - deep.root_mean) < 1e-9);
      CHECK(std::abs(edge_correlation(p) - deep.edge_moment) < 1e-9);
    }
  }
}

TEST_CASE("the tanh[tanh] recursion does not reproduce the finite-depth limit") {
  const int k = 3;
  const double beta = 1.0;
  double h = k * beta;
  for (int i = 0; i < 10000; ++i) h = (k - 1) * std::tanh(std::tanh(beta) * std::tanh(h));
  const double root_from_tanh_form = std::tanh(static_cast<double>(k) / (k - 1) * h);
  const auto deep = pinned_tree(k, beta, 60);
  CHECK(std::abs(root_from_tanh_form - deep.root_mean) > 1e-3);
}

TEST_CASE("pair correlation") {
  const IsingParams p{3, 1.0, 0.0};
  CHECK(pair_correlation(p, 1) == doctest::Approx(edge_correlation(p)).epsilon(1e-13));
  const double rho = root_magnetization(p);
  double prev = 1.0;
  for (int d = 1; d <= 12; ++d) {
    const double c = pair_correlation(p, d) - rho * rho;
    CHECK(c > 0.0);
    CHECK(c < prev);
    prev = c;
  }
  CHECK(std::abs(pair_correlation(p, 200) - rho * rho) < 1e-12);
  CHECK_THROWS_AS(pair_correlation(p, 0), Error);
}

TEST_CASE("free energy derivative is half the degree times the edge correlation") {
  for (int k : {3, 4}) {
    for (double beta : {0.3, 0.7, 1.0, 1.5}) {
      const double eps = 1e-4;
      const double fd = (free_energy({k, beta + eps, 0.0}) - free_energy({k, beta - eps, 0.0})) / (2 * eps);
      CHECK(std::abs(fd - 0.5 * k * edge_correlation({k, beta, 0.0})) < 1e-6);
    }
  }
}

TEST_CASE("tree shape layout") {
  const TreeShape s(3, 3);
  CHECK(s.size() == 22);
  CHECK(tree_size(3, 3) == 22);
  CHECK(tree_size(4, 2) == 17);
  CHECK(s.level_begin(1) == 1);
  CHECK(s.level_begin(2) == 4);
  CHECK(s.level_begin(3) == 10);
  CHECK(s.level_begin(4) == 22);
  CHECK(s.parent(0) == 0);
  CHECK(s.parent(3) == 0);
  CHECK(s.parent(4) == 1);
  CHECK(s.parent(9) == 3);
  CHECK(s.parent(10) == 4);
  CHECK(s.parent(21) == 9);
  CHECK(s.depth_of(21) == 3);
  CHECK_THROWS_AS(s.depth_of(22), Error);
}

TEST_CASE("table marginals: normalized, symmetric, ordered") {
  const IsingParams p{3, 1.0, 0.0};
  for (int t : {0, 1, 2}) {
    const auto plus = plus_boundary_marginal(p, t, t + 3);
    const auto minus = minus_boundary_marginal(p, t, t + 3);
    const auto mix = mixture_marginal(p, t, t + 3);
    const auto free = free_boundary_marginal(p, t, t + 3);
    REQUIRE(plus.has_table());
    const auto tp = plus.table();
    const auto tm = minus.table();
    const auto tx = mix.table();
    const auto tf = free.table();
    const std::size_t mask = tp.size() - 1;
    CHECK(std::accumulate(tp.begin(), tp.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::accumulate(tf.begin(), tf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-13));
    for (std::size_t s = 0; s < tp.size(); ++s) {
      REQUIRE(tm[s] == tp[mask ^ s]);
      REQUIRE(tx[s] == tx[mask ^ s]);
      REQUIRE(tf[s] == doctest::Approx(tf[mask ^ s]).epsilon(1e-12));
    }
    for (std::size_t pos = 0; pos < plus.shape().size(); ++pos) {
      const double mp = table_vertex_mean(tp, pos);
      const double mf = table_vertex_mean(tf, pos);
      const double mm = table_vertex_mean(tm, pos);
      CHECK(mm <= mf + 1e-14);
      CHECK(mf <= mp + 1e-14);
      CHECK(std::abs(mf) < 1e-12);
      CHECK(std::abs(table_vertex_mean(tx, pos)) < 1e-12);
    }
  }
}

TEST_CASE("table and message representations agree") {
  for (double beta : {0.4, 1.0}) {
    const IsingParams p{3, beta, 0.0};
    for (int t : {1, 2}) {
      for (const auto& m : {plus_boundary_marginal(p, t, t + 2), minus_boundary_marginal(p, t, t + 4),
                            mixture_marginal(p, t, t + 1), free_boundary_marginal(p, t, t + 1),
                            leaf_field_marginal(p, t, 0.7), plus_limit_marginal(p, t)}) {
        const auto table = m.table();
        const TreeShape& shape = m.shape();
        for (std::size_t pos = 0; pos < shape.size(); ++pos) {
          CHECK(std::abs(table_vertex_mean(table, pos) - m.vertex_mean(pos)) < 1e-12);
          if (pos > 0) {
            const double moment = table_edge_moment(table, shape.parent(pos), pos);
            CHECK(std::abs(moment - m.edge_moment(shape.depth_of(pos) - 1)) < 1e-12);
          }
        }
      }
    }
  }
  const auto big = plus_boundary_marginal({3, 1.0, 0.0}, 6, 8);
  CHECK_FALSE(big.has_table());
  CHECK_THROWS_AS(big.table(), Error);
  CHECK_THROWS_AS(plus_boundary_marginal({3, 1.0, 0.0}, 4, 8, Representation::table), Error);
  CHECK(big.root_mean() > 0.0);
}

TEST_CASE("plus boundary marginals decrease toward the plus limit") {
  const IsingParams p{3, 1.0, 0.0};
  double prev = 1.0;
  for (int t_plus = 1; t_plus <= 40; ++t_plus) {
    const double m = plus_boundary_marginal(p, 0, t_plus, Representation::messages).root_mean();
    CHECK(m <= prev + 1e-15);
    CHECK(std::abs(m - pinned_tree(3, 1.0, t_plus).root_mean) < 1e-12);
    prev = m;
  }
  CHECK(std::abs(prev - root_magnetization(p)) < 1e-10);
  const auto limit = plus_limit_marginal(p, 2);
  const auto deep = plus_boundary_marginal(p, 2, 40);
  const auto a = limit.table();
  const auto b = deep.table();
  for (std::size_t s = 0; s < a.size(); ++s) REQUIRE(std::abs(a[s] - b[s]) < 1e-10);
}

TEST_CASE("DLR property") {
  for (double beta : {0.4, 1.0}) {
    for (int t : {0, 1}) {
      CHECK(dlr_check({3, beta, 0.0}, t, t + 2) < 1e-10);
      CHECK(dlr_check({3, beta, 0.0}, t, t + 1) < 1e-10);
    }
  }
  CHECK_THROWS_AS(dlr_check({3, 1.0, 0.0}, 1, 1), Error);
}

TEST_CASE("f statistic on the tree") {
  const IsingParams p{3, 1.0, 0.0};
  const double delta = root_magnetization(p) / 2;
  for (int ell : {1, 2}) {
    const double plus = f_statistic_tree_exact(p, PureBoundary::plus, ell, delta);
    const double minus = f_statistic_tree_exact(p, PureBoundary::minus, ell, delta);
    CHECK(plus >= 0.0);
    CHECK(minus <= 1.0);
    CHECK(plus < minus);
    const std::size_t n = 200000;
    const double sp = f_statistic_tree_sampled(p, PureBoundary::plus, ell, delta, n, 5);
    const double sm = f_statistic_tree_sampled(p, PureBoundary::minus, ell, delta, n, 6);
    CHECK(std::abs(sp - plus) < 5 * std::sqrt(plus * (1 - plus) / n) + 1e-9);
    CHECK(std::abs(sm - minus) < 5 * std::sqrt(minus * (1 - minus) / n) + 1e-9);
  }
  CHECK_THROWS_AS(f_statistic_tree_exact(p, PureBoundary::plus, 1, 0.0), Error);
  CHECK_THROWS_AS(f_statistic_tree_exact(p, PureBoundary::plus, 1, 0.999), Error);
}

TEST_CASE("marginal CSV output") {
  const auto m = plus_boundary_marginal({3, 1.0, 0.0}, 1, 3);
  std::ostringstream out;
  m.write_csv(out);
  std::istringstream in(out.str());
  std::string line;
  int comments = 0;
  int rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) {
      ++comments;
    } else if (line == "configuration,probability") {
      header = true;
    } else {
      ++rows;
    }
  }
  CHECK(comments == 2);
  CHECK(header);
  CHECK(rows == 16);
}

TEST_CASE("tree marginals reject a nonzero field") {
  CHECK_THROWS_AS(plus_boundary_marginal({3, 1.0, 0.2}, 1, 2), Error);
  CHECK_THROWS_AS(plus_boundary_marginal({3, 1.0, 0.0}, 2, 2), Error);
}
