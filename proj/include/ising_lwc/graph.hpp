#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ising_lwc {

using Vertex = std::uint32_t;

/// Unordered edge stored with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Simple k-regular graph. Immutable after construction; the constructor
/// validates regularity and simplicity, so every instance satisfies them.
class RegularGraph {
 public:
  /// Throws Error(invalid_degree) if the edge list is not a simple k-regular
  /// graph on n vertices.
  RegularGraph(std::size_t n, int k, std::vector<Edge> edges);

  std::size_t num_vertices() const noexcept { return n_; }
  int degree() const noexcept { return k_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }

  /// Sorted neighbor list of v.
  std::span<const Vertex> neighbors(Vertex v) const noexcept {
    return {adjacency_.data() + static_cast<std::size_t>(v) * k_, static_cast<std::size_t>(k_)};
  }

  /// Edges with u < v, in ascending lexicographic order.
  std::span<const Edge> edges() const noexcept { return edges_; }

  bool has_edge(Vertex a, Vertex b) const noexcept;

  /// FNV-1a over (n, k, edge list); identifies a graph in batch metadata.
  std::uint64_t hash() const noexcept;
  std::string hash_hex() const;

 private:
  std::size_t n_;
  int k_;
  std::vector<Vertex> adjacency_;
  std::vector<Edge> edges_;
};

/// Uniform simple k-regular graph via the configuration model, resampling the
/// whole pairing whenever it produces a loop or a multi-edge.
RegularGraph generate_random_regular(std::size_t n, int k, std::uint64_t seed);

RegularGraph complete_graph_k4();
RegularGraph petersen_graph();

/// Vertex-disjoint union; component c occupies ids [offset_c, offset_c + n_c).
RegularGraph disjoint_union(std::span<const RegularGraph> parts);

/// Relabels vertices: new id of v is perm[v].
RegularGraph relabel(const RegularGraph& g, std::span<const Vertex> perm);

/// Radius-t ball around a vertex.
struct Ball {
  Vertex center = 0;
  int radius = 0;
  /// Center first, then by distance, ties by ascending vertex id.
  std::vector<Vertex> vertices;
  /// Distance from the center, parallel to `vertices`.
  std::vector<int> distance;
  /// Edges of the induced subgraph, in host vertex ids.
  std::vector<Edge> induced_edges;
  bool is_tree = false;
};

Ball ball(const RegularGraph& g, Vertex center, int t);

/// True iff the ball, rooted at its center, is isomorphic to T_k(t).
bool is_tree_isomorphic(const Ball& b, int k);

/// Root-preserving isomorphism onto T_k(t): entry p is the host vertex that
/// plays the role of canonical tree position p (root, then children grouped
/// by parent in BFS order, siblings by ascending id). Empty if the ball is
/// not isomorphic to T_k(t).
std::optional<std::vector<Vertex>> tree_order(const Ball& b, int k);

/// Number of vertices of T_k(t).
std::size_t tree_size(int k, int t);

double tree_likeness_fraction(const RegularGraph& g, int t);

/// Length of the shortest cycle.
int girth(const RegularGraph& g);

/// Number of edges with exactly one endpoint in S. Duplicates in S are
/// ignored.
std::size_t edge_boundary(const RegularGraph& g, std::span<const Vertex> subset);

enum class ExpansionMethod { exact, spectral };

struct ExpansionReport {
  double gamma = 0.5;
  double lambda = 0.0;
  ExpansionMethod method = ExpansionMethod::exact;
  std::optional<std::vector<Vertex>> witness;
};

inline constexpr std::size_t max_exact_expansion_vertices = 24;
inline constexpr std::size_t max_spectral_expansion_vertices = 2048;

/// exact: min over nonempty S with |S| <= gamma*n of |dS|/|S| (n <= 24).
/// spectral: (k - lambda_2)(1 - gamma), a certified lower bound that reduces
/// to (k - lambda_2)/2 at gamma = 1/2.
ExpansionReport expansion_lower_bound(const RegularGraph& g, double gamma,
                                      ExpansionMethod method);

/// Second-largest adjacency eigenvalue (dense symmetric eigensolver).
double second_adjacency_eigenvalue(const RegularGraph& g);

/// Maximal independent set built greedily in ascending vertex id.
std::vector<Vertex> greedy_independent_set(const RegularGraph& g);

/// Edge-list text format: "n k" header, then one "i j" line per edge,
/// 0-indexed, i < j, ascending.
void write_edge_list(std::ostream& out, const RegularGraph& g);
RegularGraph read_edge_list(std::istream& in);
void save_edge_list(const std::string& path, const RegularGraph& g);
RegularGraph load_edge_list(const std::string& path);

}  // namespace ising_lwc
