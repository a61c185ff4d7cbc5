#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "ising_lwc/error.hpp"
#include "ising_lwc/graph.hpp"

using namespace ising_lwc;

namespace {

std::vector<Edge> sorted_edges(const RegularGraph& g) { return {g.edges().begin(), g.edges().end()}; }

// Every perfect matching of 3n half-edges (vertex h/3), kept only when the
// resulting multigraph is simple; returns matchings per labeled graph.
void enumerate_matchings(std::vector<int>& free, std::vector<Edge>& partial, std::map<std::vector<Edge>, long>& out) {
  if (free.empty()) {
    std::vector<Edge> edges = partial;
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) return;
    ++out[edges];
    return;
  }
  const int a = free.front();
  for (std::size_t j = 1; j < free.size(); ++j) {
    const int b = free[j];
    const auto va = static_cast<Vertex>(a / 3);
    const auto vb = static_cast<Vertex>(b / 3);
    if (va == vb) continue;
    std::vector<int> rest;
    for (std::size_t i = 1; i < free.size(); ++i) {
      if (i != j) rest.push_back(free[i]);
    }
    partial.push_back(va < vb ? Edge{va, vb} : Edge{vb, va});
    enumerate_matchings(rest, partial, out);
    partial.pop_back();
  }
}

}  // namespace

TEST_CASE("random regular: K4 is the only simple 3-regular graph on 4 vertices") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL, 123456789ULL}) {
    CHECK(sorted_edges(generate_random_regular(4, 3, seed)) == sorted_edges(complete_graph_k4()));
  }
}

TEST_CASE("random regular: invalid parameters") {
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io_error;
  };
  CHECK(code_of([] { generate_random_regular(5, 3, 1); }) == ErrorCode::invalid_degree);
  CHECK(code_of([] { generate_random_regular(3, 3, 1); }) == ErrorCode::invalid_degree);
  CHECK(code_of([] { generate_random_regular(10, 2, 1); }) == ErrorCode::invalid_degree);
  CHECK(code_of([] { RegularGraph(4, 3, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {1, 3}}); }) ==
        ErrorCode::invalid_degree);
}

TEST_CASE("random regular: regular, simple and seed-deterministic") {
  for (std::size_t n : {6, 10, 50, 1000}) {
    const auto a = generate_random_regular(n, 3, 42);
    const auto b = generate_random_regular(n, 3, 42);
    CHECK(sorted_edges(a) == sorted_edges(b));
    CHECK(a.num_edges() == n * 3 / 2);
    for (Vertex v = 0; v < n; ++v) {
      auto nb = a.neighbors(v);
      CHECK(std::adjacent_find(nb.begin(), nb.end()) == nb.end());
      CHECK(std::find(nb.begin(), nb.end(), v) == nb.end());
      for (Vertex w : nb) CHECK(a.has_edge(w, v));
    }
  }
  const auto g4 = generate_random_regular(20, 4, 7);
  CHECK(g4.degree() == 4);
  CHECK(g4.num_edges() == 40);
}

TEST_CASE("random regular: uniform over the 70 labeled 3-regular graphs on 6 vertices") {
  std::vector<int> half_edges(18);
  std::iota(half_edges.begin(), half_edges.end(), 0);
  std::vector<Edge> partial;
  std::map<std::vector<Edge>, long> matchings;
  enumerate_matchings(half_edges, partial, matchings);
  REQUIRE(matchings.size() == 70);
  // Each simple labeled graph arises from (3!)^6 pairings, so the conditioned
  // configuration model is uniform.
  for (const auto& [edges, count] : matchings) CHECK(count == 46656);

  std::map<std::vector<Edge>, long> observed;
  constexpr long draws = 100000;
  for (long s = 0; s < draws; ++s) ++observed[sorted_edges(generate_random_regular(6, 3, static_cast<std::uint64_t>(s)))];
  REQUIRE(observed.size() == 70);
  double chi2 = 0.0;
  const double expected = static_cast<double>(draws) / 70.0;
  for (const auto& [edges, count] : matchings) {
    const double o = static_cast<double>(observed[edges]);
    chi2 += (o - expected) * (o - expected) / expected;
  }
  // 0.99 quantile of chi-square with 69 degrees of freedom.
  CHECK(chi2 < 99.22751547056947);
}

TEST_CASE("ball: radius 0, K4, Petersen") {
  const auto k4 = complete_graph_k4();
  const auto pet = petersen_graph();
  auto b0 = ball(pet, 3, 0);
  CHECK(b0.vertices == std::vector<Vertex>{3});
  CHECK(b0.induced_edges.empty());
  CHECK(b0.is_tree);
  CHECK(is_tree_isomorphic(b0, 3));

  auto b1 = ball(k4, 2, 1);
  CHECK(b1.vertices == std::vector<Vertex>{2, 0, 1, 3});
  CHECK(b1.induced_edges.size() == 6);
  CHECK_FALSE(b1.is_tree);

  for (Vertex i = 0; i < 10; ++i) {
    auto b = ball(pet, i, 2);
    CHECK(b.vertices.size() == 10);
    CHECK_FALSE(b.is_tree);
    CHECK_FALSE(is_tree_isomorphic(b, 3));
    CHECK(is_tree_isomorphic(ball(pet, i, 1), 3));
  }
}

TEST_CASE("ball: canonical order is distance-major, id-minor") {
  const auto g = generate_random_regular(200, 3, 5);
  for (Vertex i = 0; i < 20; ++i) {
    const auto b = ball(g, i, 3);
    CHECK(b.vertices.front() == i);
    for (std::size_t p = 1; p < b.vertices.size(); ++p) {
      CHECK(b.distance[p - 1] <= b.distance[p]);
      if (b.distance[p - 1] == b.distance[p]) CHECK(b.vertices[p - 1] < b.vertices[p]);
    }
  }
}

TEST_CASE("tree_order: children grouped by parent") {
  const auto g = generate_random_regular(2000, 3, 11);
  int checked = 0;
  for (Vertex i = 0; i < 50; ++i) {
    const auto b = ball(g, i, 2);
    const auto order = tree_order(b, 3);
    if (!order) continue;
    ++checked;
    const auto& o = *order;
    REQUIRE(o.size() == 10);
    CHECK(o[0] == i);
    for (int c = 1; c <= 3; ++c) CHECK(g.has_edge(o[0], o[c]));
    // Positions 4,5 hang below 1; 6,7 below 2; 8,9 below 3.
    for (std::size_t p = 4; p < 10; ++p) CHECK(g.has_edge(o[1 + (p - 4) / 2], o[p]));
    std::set<Vertex> a(o.begin(), o.end());
    std::set<Vertex> v(b.vertices.begin(), b.vertices.end());
    CHECK(a == v);
  }
  CHECK(checked > 40);
}

TEST_CASE("tree-likeness") {
  CHECK(tree_likeness_fraction(complete_graph_k4(), 1) == 0.0);
  CHECK(tree_likeness_fraction(petersen_graph(), 1) == 1.0);
  CHECK(tree_likeness_fraction(petersen_graph(), 2) == 0.0);
  const auto g = generate_random_regular(10000, 3, 2024);
  CHECK(tree_likeness_fraction(g, 2) >= 0.99);
  double prev = 1.0;
  for (int t = 0; t <= 4; ++t) {
    const double f = tree_likeness_fraction(g, t);
    CHECK(f <= prev);
    prev = f;
  }
}

TEST_CASE("tree isomorphism is invariant under relabeling") {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = generate_random_regular(60, 3, seed);
    std::vector<Vertex> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto h = relabel(g, perm);
    for (Vertex i = 0; i < 60; ++i) {
      for (int t = 0; t <= 3; ++t) {
        CHECK(is_tree_isomorphic(ball(g, i, t), 3) == is_tree_isomorphic(ball(h, perm[i], t), 3));
      }
    }
    CHECK(girth(g) == girth(h));
  }
}

TEST_CASE("girth") {
  CHECK(girth(complete_graph_k4()) == 3);
  CHECK(girth(petersen_graph()) == 5);
  const std::vector<RegularGraph> parts{complete_graph_k4(), petersen_graph()};
  CHECK(girth(disjoint_union(parts)) == 3);
}

TEST_CASE("edge boundary") {
  const auto k4 = complete_graph_k4();
  CHECK(edge_boundary(k4, {}) == 0);
  const std::vector<Vertex> all{0, 1, 2, 3};
  CHECK(edge_boundary(k4, all) == 0);
  const std::vector<Vertex> pair{0, 1};
  CHECK(edge_boundary(k4, pair) == 4);
}

TEST_CASE("expansion: exact oracle cases") {
  const auto k4 = expansion_lower_bound(complete_graph_k4(), 0.5, ExpansionMethod::exact);
  CHECK(k4.lambda == 2.0);
  REQUIRE(k4.witness);
  CHECK(k4.witness->size() == 2);

  const std::vector<RegularGraph> parts{complete_graph_k4(), complete_graph_k4()};
  const auto two = disjoint_union(parts);
  const auto r = expansion_lower_bound(two, 0.5, ExpansionMethod::exact);
  CHECK(r.lambda == 0.0);
  REQUIRE(r.witness);
  CHECK(r.witness->size() == 4);
  CHECK(edge_boundary(two, *r.witness) == 0);

  CHECK_THROWS_AS(expansion_lower_bound(generate_random_regular(26, 3, 1), 0.5, ExpansionMethod::exact), Error);
}

TEST_CASE("expansion: spectral bound") {
  CHECK(second_adjacency_eigenvalue(petersen_graph()) == doctest::Approx(1.0).epsilon(1e-12));
  const auto pet = expansion_lower_bound(petersen_graph(), 0.5, ExpansionMethod::spectral);
  CHECK(pet.lambda >= 1.0 - 1e-9);
  CHECK_FALSE(pet.witness);
  for (std::size_t n : {10, 16, 20}) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto g = generate_random_regular(n, 3, seed);
      const auto exact = expansion_lower_bound(g, 0.5, ExpansionMethod::exact);
      const auto spectral = expansion_lower_bound(g, 0.5, ExpansionMethod::spectral);
      CHECK(exact.lambda >= spectral.lambda);
      CHECK(edge_boundary(g, *exact.witness) == doctest::Approx(exact.lambda * exact.witness->size()));
    }
  }
}

TEST_CASE("edge list round trip and validation") {
  const auto g = generate_random_regular(30, 3, 8);
  std::stringstream ss;
  write_edge_list(ss, g);
  const auto h = read_edge_list(ss);
  CHECK(sorted_edges(h) == sorted_edges(g));
  CHECK(h.hash() == g.hash());

  std::stringstream bad("4 3\n0 1\n0 2\n0 3\n1 2\n1 3\n");
  CHECK_THROWS_AS(read_edge_list(bad), Error);
  std::stringstream unsorted("4 3\n0 1\n0 3\n0 2\n1 2\n1 3\n2 3\n");
  CHECK_THROWS_AS(read_edge_list(unsorted), Error);
}

TEST_CASE("greedy independent set") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto g = generate_random_regular(400, 3, seed);
    const auto s = greedy_independent_set(g);
    CHECK(s.size() >= 400 / 4);
    std::vector<char> in(400, 0);
    for (Vertex v : s) in[v] = 1;
    for (const auto& e : g.edges()) CHECK_FALSE((in[e.u] && in[e.v]));
    for (Vertex v = 0; v < 400; ++v) {
      if (in[v]) continue;
      auto nb = g.neighbors(v);
      CHECK(std::any_of(nb.begin(), nb.end(), [&](Vertex w) { return in[w] != 0; }));
    }
  }
}
