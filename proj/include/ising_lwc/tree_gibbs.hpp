#pragma once

// Exact Ising computations on the k-regular tree T_k: the cavity fixed point,
// finite-depth marginals under plus/minus/free/mixture/leaf-field boundary
// conditions, and the closed-form observables of the plus measure.
//
// Spin tables are indexed by configuration: bit p of the index is set iff
// the spin at canonical tree position p is +1. Canonical positions number
// T_k(t) breadth-first: root 0, its k children 1..k, then the k-1 children of
// position 1, those of position 2, and so on.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace ising_lwc {

struct IsingParams {
  int k = 3;
  double beta = 0.0;
  double field = 0.0;  ///< external field B
};

/// Throws invalid-argument unless k >= 3 and beta is finite and >= 0.
void validate(const IsingParams& p);

/// atanh(1/(k-1)); uniqueness holds iff beta <= critical_beta(k).
double critical_beta(int k);
bool in_uniqueness_regime(const IsingParams& p);

/// Field a spin receives from a neighbor whose own cavity field is h:
/// atanh(tanh(beta) tanh(h)). h = +inf (a frozen +1 spin) gives beta.
double cavity_message(double beta, double h);

/// h -> (k-1) * cavity_message(beta, h).
double fixed_point_map(const IsingParams& p, double h);

struct TreeFixedPoint {
  double h = 0.0;  ///< largest fixed point of fixed_point_map
  double m = 0.0;  ///< tanh(h)
  bool converged = false;
  int iterations = 0;
  bool uniqueness = true;
};

inline constexpr double fixed_point_tolerance = 1e-12;
inline constexpr int fixed_point_max_iterations = 10000;

/// Iterates fixed_point_map from h = k*beta. In the uniqueness regime the
/// answer is h = 0 exactly. Throws nonzero-field if B != 0.
TreeFixedPoint solve_fixed_point(const IsingParams& p);

/// Layout of T_k(t) in canonical BFS order.
class TreeShape {
 public:
  TreeShape(int k, int depth);

  int k() const noexcept { return k_; }
  int depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return level_begin_.back(); }

  int depth_of(std::size_t position) const;
  /// Parent position; the root reports itself.
  std::size_t parent(std::size_t position) const;
  /// First position of the given depth; level_begin(depth()+1) == size().
  std::size_t level_begin(int d) const { return level_begin_.at(static_cast<std::size_t>(d)); }
  /// Children per vertex at depth d below T_k: k at the root, k-1 elsewhere.
  int children_per_vertex(int d) const noexcept { return d == 0 ? k_ : k_ - 1; }

 private:
  int k_;
  int depth_;
  std::vector<std::size_t> level_begin_;
};

enum class Boundary { plus, minus, free, mixture, leaf_field };
enum class Representation { automatic, table, messages };

const char* to_string(Boundary b) noexcept;

inline constexpr std::size_t max_table_spins = 22;

/// Distribution of the spins of T_k(t). Every boundary condition handled here
/// is a mixture of at most two "leaf-field" components: the Ising model on
/// T_k(t) in which each depth-t vertex additionally sees its missing children
/// as independent subtrees, each sending the same message u. A depth-t vertex
/// therefore feels the total field c*u with c its number of children in T_k.
class TreeMarginal {
 public:
  struct Component {
    double weight = 1.0;
    double child_message = 0.0;  ///< u
  };

  TreeMarginal(const IsingParams& p, int t, Boundary boundary,
               std::vector<Component> components, Representation repr);

  const IsingParams& params() const noexcept { return params_; }
  int depth() const noexcept { return shape_.depth(); }
  Boundary boundary() const noexcept { return boundary_; }
  const TreeShape& shape() const noexcept { return shape_; }
  std::span<const Component> components() const noexcept { return components_; }

  bool has_table() const noexcept { return !table_.empty(); }
  /// Probability table over 2^size configurations. Throws size-limit if the
  /// marginal is held as messages only.
  std::span<const double> table() const;

  /// Single-site mean at any vertex of depth d (all such vertices agree).
  double mean_at_depth(int d) const;
  double root_mean() const { return mean_at_depth(0); }
  double vertex_mean(std::size_t position) const { return mean_at_depth(shape_.depth_of(position)); }
  /// E[x_a x_b] for a parent at depth d and one of its children.
  double edge_moment(int parent_depth) const;

  /// "configuration,probability" rows preceded by a '#' header that records
  /// the spin ordering.
  void write_csv(std::ostream& out) const;

 private:
  double component_mean(const Component& c, int d) const;
  double component_edge_moment(const Component& c, int d) const;
  std::vector<double> upward_fields(const Component& c) const;

  IsingParams params_;
  TreeShape shape_;
  Boundary boundary_;
  std::vector<Component> components_;
  std::vector<double> table_;
};

/// Exact Ising table of T_k(t) with per-leaf children messages u: the
/// reference enumeration shared by the factories below.
std::vector<double> leaf_field_table(const IsingParams& p, const TreeShape& shape, double u);

/// Marginal on T_k(t) of the depth-t_plus tree with every depth-t_plus spin
/// forced to +1. Requires t_plus > t >= 0 and B = 0.
TreeMarginal plus_boundary_marginal(const IsingParams& p, int t, int t_plus,
                                    Representation repr = Representation::automatic);
TreeMarginal minus_boundary_marginal(const IsingParams& p, int t, int t_plus,
                                     Representation repr = Representation::automatic);
TreeMarginal free_boundary_marginal(const IsingParams& p, int t, int t_plus,
                                    Representation repr = Representation::automatic);
/// (plus + minus)/2.
TreeMarginal mixture_marginal(const IsingParams& p, int t, int t_plus,
                              Representation repr = Representation::automatic);
/// Each missing child subtree of a depth-t vertex has cavity field h_leaf.
TreeMarginal leaf_field_marginal(const IsingParams& p, int t, double h_leaf,
                                 Representation repr = Representation::automatic);

/// t_plus -> infinity limits: the restrictions of nu_+ and (nu_+ + nu_-)/2.
TreeMarginal plus_limit_marginal(const IsingParams& p, int t,
                                 Representation repr = Representation::automatic);
TreeMarginal mixture_limit_marginal(const IsingParams& p, int t,
                                    Representation repr = Representation::automatic);

/// nu_+(x_o x_1) = (tanh b + m^2) / (1 + tanh b m^2), m = tanh h.
double edge_correlation(const IsingParams& p);
/// rho = nu_+(x_o).
double root_magnetization(const IsingParams& p);
/// Bethe free-energy density phi(beta).
double free_energy(const IsingParams& p);
/// nu_+(x_j x_j') for tree distance d >= 1, from the exact law of the path.
double pair_correlation(const IsingParams& p, int d);

enum class PureBoundary { plus, minus };

/// nu(F_o(ell, delta) = 1): probability that the spin average over T_k(ell)
/// is <= -delta. Exact enumeration when |T_k(ell)| <= 22, otherwise perfect
/// top-down sampling. Requires 0 < delta < rho.
double f_statistic_tree(const IsingParams& p, PureBoundary boundary, int ell, double delta,
                        std::size_t nsamples, std::uint64_t seed);
double f_statistic_tree_exact(const IsingParams& p, PureBoundary boundary, int ell, double delta);
double f_statistic_tree_sampled(const IsingParams& p, PureBoundary boundary, int ell, double delta,
                                std::size_t nsamples, std::uint64_t seed);

/// Max over shell configurations (depths t+1 .. t_plus-1; depth t_plus is
/// frozen to +1) of the TV distance between the conditional law of x_{T(t)}
/// under the plus-boundary model and the Ising form
/// exp{beta * sum over E(T_k(t+1)) of x_i x_j}.
double dlr_check(const IsingParams& p, int t, int t_plus);

}  // namespace ising_lwc
