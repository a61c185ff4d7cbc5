#include "ising_lwc/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <numeric>
#include <random>

#include "ising_lwc/error.hpp"

namespace ising_lwc {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_degree: return "invalid-degree";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::size_limit: return "size-limit";
    case ErrorCode::nonzero_field: return "nonzero-field";
    case ErrorCode::config_error: return "config-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "error";
}

RegularGraph::RegularGraph(std::size_t n, int k, std::vector<Edge> edges)
    : n_(n), k_(k), edges_(std::move(edges)) {
  if (k < 1 || n == 0) {
    throw Error(ErrorCode::invalid_degree, "degree and vertex count must be positive");
  }
  if ((n * static_cast<std::size_t>(k)) % 2 != 0) {
    throw Error(ErrorCode::invalid_degree, "n*k must be even");
  }
  if (edges_.size() != n * static_cast<std::size_t>(k) / 2) {
    throw Error(ErrorCode::invalid_degree, "edge count is not n*k/2");
  }
  for (auto& e : edges_) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u == e.v) throw Error(ErrorCode::invalid_degree, "self-loop");
    if (e.v >= n) throw Error(ErrorCode::invalid_degree, "vertex id out of range");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw Error(ErrorCode::invalid_degree, "repeated edge");
  }
  std::vector<int> fill(n, 0);
  adjacency_.assign(n * static_cast<std::size_t>(k), 0);
  for (const auto& e : edges_) {
    for (auto [a, b] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
      if (fill[a] == k) throw Error(ErrorCode::invalid_degree, "vertex degree exceeds k");
      adjacency_[static_cast<std::size_t>(a) * k + fill[a]++] = b;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (fill[v] != k) throw Error(ErrorCode::invalid_degree, "vertex degree below k");
    auto first = adjacency_.begin() + static_cast<std::ptrdiff_t>(v * k);
    std::sort(first, first + k);
  }
}

bool RegularGraph::has_edge(Vertex a, Vertex b) const noexcept {
  if (a >= n_ || b >= n_) return false;
  auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::uint64_t RegularGraph::hash() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(n_);
  mix(static_cast<std::uint64_t>(k_));
  for (const auto& e : edges_) {
    mix(e.u);
    mix(e.v);
  }
  return h;
}

std::string RegularGraph::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

RegularGraph generate_random_regular(std::size_t n, int k, std::uint64_t seed) {
  if (k < 3) throw Error(ErrorCode::invalid_degree, "k must be at least 3");
  if (n <= static_cast<std::size_t>(k)) throw Error(ErrorCode::invalid_degree, "n must exceed k");
  if ((n * static_cast<std::size_t>(k)) % 2 != 0) {
    throw Error(ErrorCode::invalid_degree, "n*k must be even");
  }
  std::mt19937_64 rng(seed);
  const std::size_t half_edges = n * static_cast<std::size_t>(k);
  std::vector<Vertex> points(half_edges);
  std::vector<Edge> edges;
  edges.reserve(half_edges / 2);
  for (;;) {
    for (std::size_t i = 0; i < half_edges; ++i) points[i] = static_cast<Vertex>(i / k);
    std::shuffle(points.begin(), points.end(), rng);
    edges.clear();
    bool simple = true;
    for (std::size_t i = 0; i < half_edges; i += 2) {
      Vertex a = points[i];
      Vertex b = points[i + 1];
      if (a == b) {
        simple = false;
        break;
      }
      edges.push_back(a < b ? Edge{a, b} : Edge{b, a});
    }
    if (!simple) continue;
    std::sort(edges.begin(), edges.end());
    if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) continue;
    return RegularGraph(n, k, std::move(edges));
  }
}

RegularGraph complete_graph_k4() {
  return RegularGraph(4, 3, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
}

RegularGraph petersen_graph() {
  std::vector<Edge> edges;
  for (Vertex i = 0; i < 5; ++i) {
    edges.push_back({i, (i + 1) % 5});          // outer 5-cycle
    edges.push_back({5 + i, 5 + (i + 2) % 5});  // inner pentagram
    edges.push_back({i, 5 + i});                // spokes
  }
  return RegularGraph(10, 3, std::move(edges));
}

RegularGraph disjoint_union(std::span<const RegularGraph> parts) {
  if (parts.empty()) throw Error(ErrorCode::invalid_argument, "disjoint union of nothing");
  const int k = parts.front().degree();
  std::vector<Edge> edges;
  Vertex offset = 0;
  for (const auto& g : parts) {
    if (g.degree() != k) throw Error(ErrorCode::invalid_degree, "components differ in degree");
    for (const auto& e : g.edges()) edges.push_back({e.u + offset, e.v + offset});
    offset += static_cast<Vertex>(g.num_vertices());
  }
  return RegularGraph(offset, k, std::move(edges));
}

RegularGraph relabel(const RegularGraph& g, std::span<const Vertex> perm) {
  if (perm.size() != g.num_vertices()) {
    throw Error(ErrorCode::invalid_argument, "permutation size mismatch");
  }
  std::vector<Edge> edges;
  edges.reserve(g.num_edges());
  for (const auto& e : g.edges()) edges.push_back({perm[e.u], perm[e.v]});
  return RegularGraph(g.num_vertices(), g.degree(), std::move(edges));
}

Ball ball(const RegularGraph& g, Vertex center, int t) {
  if (center >= g.num_vertices()) throw Error(ErrorCode::invalid_argument, "center out of range");
  if (t < 0) throw Error(ErrorCode::invalid_argument, "negative radius");
  Ball b;
  b.center = center;
  b.radius = t;
  b.vertices.push_back(center);
  b.distance.push_back(0);
  std::vector<Vertex> frontier{center};
  std::vector<Vertex> seen{center};
  for (int d = 1; d <= t && !frontier.empty(); ++d) {
    std::vector<Vertex> next;
    for (Vertex v : frontier) {
      for (Vertex w : g.neighbors(v)) {
        if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
          seen.push_back(w);
          next.push_back(w);
        }
      }
    }
    std::sort(next.begin(), next.end());
    for (Vertex w : next) {
      b.vertices.push_back(w);
      b.distance.push_back(d);
    }
    frontier = std::move(next);
  }
  std::vector<Vertex> sorted = b.vertices;
  std::sort(sorted.begin(), sorted.end());
  for (Vertex v : sorted) {
    for (Vertex w : g.neighbors(v)) {
      if (v < w && std::binary_search(sorted.begin(), sorted.end(), w)) {
        b.induced_edges.push_back({v, w});
      }
    }
  }
  // A BFS ball is connected, so it is a tree iff it has |V| - 1 edges.
  b.is_tree = b.induced_edges.size() + 1 == b.vertices.size();
  return b;
}

std::size_t tree_size(int k, int t) {
  std::size_t size = 1;
  std::size_t layer = 1;
  for (int d = 1; d <= t; ++d) {
    layer *= static_cast<std::size_t>(d == 1 ? k : k - 1);
    size += layer;
  }
  return size;
}

std::optional<std::vector<Vertex>> tree_order(const Ball& b, int k) {
  if (!b.is_tree || b.vertices.size() != tree_size(k, b.radius)) return std::nullopt;
  // Children lists within the ball, derived from induced edges.
  auto position = [&b](Vertex v) {
    return static_cast<std::size_t>(std::find(b.vertices.begin(), b.vertices.end(), v) -
                                    b.vertices.begin());
  };
  std::vector<std::vector<Vertex>> children(b.vertices.size());
  for (const auto& e : b.induced_edges) {
    std::size_t pu = position(e.u);
    std::size_t pv = position(e.v);
    if (b.distance[pu] + 1 == b.distance[pv]) {
      children[pu].push_back(e.v);
    } else if (b.distance[pv] + 1 == b.distance[pu]) {
      children[pv].push_back(e.u);
    } else {
      return std::nullopt;  // edge within a distance shell
    }
  }
  std::vector<Vertex> order{b.center};
  for (std::size_t head = 0; head < order.size(); ++head) {
    std::size_t p = position(order[head]);
    auto& ch = children[p];
    std::size_t expected = 0;
    if (b.distance[p] < b.radius) expected = b.distance[p] == 0 ? k : k - 1;
    if (ch.size() != expected) return std::nullopt;
    std::sort(ch.begin(), ch.end());
    order.insert(order.end(), ch.begin(), ch.end());
  }
  if (order.size() != b.vertices.size()) return std::nullopt;
  return order;
}

bool is_tree_isomorphic(const Ball& b, int k) { return tree_order(b, k).has_value(); }

double tree_likeness_fraction(const RegularGraph& g, int t) {
  std::size_t count = 0;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (is_tree_isomorphic(ball(g, v, t), g.degree())) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(g.num_vertices());
}

int girth(const RegularGraph& g) {
  const std::size_t n = g.num_vertices();
  int best = std::numeric_limits<int>::max();
  std::vector<int> dist(n, -1);
  std::vector<Vertex> parent(n, 0);
  std::vector<Vertex> touched;
  for (Vertex s = 0; s < n; ++s) {
    for (Vertex v : touched) dist[v] = -1;
    touched.clear();
    std::deque<Vertex> queue{s};
    dist[s] = 0;
    parent[s] = static_cast<Vertex>(n);
    touched.push_back(s);
    while (!queue.empty()) {
      Vertex v = queue.front();
      queue.pop_front();
      if (2 * dist[v] + 1 >= best) break;
      for (Vertex w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          parent[w] = v;
          touched.push_back(w);
          queue.push_back(w);
        } else if (parent[v] != w) {
          best = std::min(best, dist[v] + dist[w] + 1);
        }
      }
    }
  }
  return best;
}

std::size_t edge_boundary(const RegularGraph& g, std::span<const Vertex> subset) {
  std::vector<char> in(g.num_vertices(), 0);
  for (Vertex v : subset) {
    if (v >= g.num_vertices()) throw Error(ErrorCode::invalid_argument, "vertex out of range");
    in[v] = 1;
  }
  std::size_t count = 0;
  for (const auto& e : g.edges()) count += in[e.u] != in[e.v];
  return count;
}

std::vector<Vertex> greedy_independent_set(const RegularGraph& g) {
  std::vector<char> blocked(g.num_vertices(), 0);
  std::vector<Vertex> set;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (blocked[v]) continue;
    set.push_back(v);
    for (Vertex w : g.neighbors(v)) blocked[w] = 1;
  }
  return set;
}

}  // namespace ising_lwc
