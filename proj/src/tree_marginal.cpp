#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>

#include "ising_lwc/error.hpp"
#include "ising_lwc/graph.hpp"
#include "ising_lwc/kernels.hpp"
#include "ising_lwc/tree_gibbs.hpp"

namespace ising_lwc {

const char* to_string(Boundary b) noexcept {
  switch (b) {
    case Boundary::plus: return "plus";
    case Boundary::minus: return "minus";
    case Boundary::free: return "free";
    case Boundary::mixture: return "mixture";
    case Boundary::leaf_field: return "leaf_field";
  }
  return "?";
}

TreeShape::TreeShape(int k, int depth) : k_(k), depth_(depth) {
  if (k < 2) throw Error(ErrorCode::invalid_argument, "tree degree must be at least 2");
  if (depth < 0) throw Error(ErrorCode::invalid_argument, "tree depth must be non-negative");
  level_begin_.push_back(0);
  std::size_t layer = 1;
  for (int d = 0; d <= depth; ++d) {
    if (layer > (std::size_t{1} << 60) - level_begin_.back()) {
      throw Error(ErrorCode::size_limit, "tree too deep to index");
    }
    level_begin_.push_back(level_begin_.back() + layer);
    layer *= static_cast<std::size_t>(children_per_vertex(d));
  }
}

int TreeShape::depth_of(std::size_t position) const {
  if (position >= size()) throw Error(ErrorCode::invalid_argument, "tree position out of range");
  const auto it = std::upper_bound(level_begin_.begin(), level_begin_.end(), position);
  return static_cast<int>(it - level_begin_.begin()) - 1;
}

std::size_t TreeShape::parent(std::size_t position) const {
  const int d = depth_of(position);
  if (d == 0) return 0;
  const std::size_t offset = position - level_begin(d);
  return level_begin(d - 1) + offset / static_cast<std::size_t>(children_per_vertex(d - 1));
}

namespace {

std::vector<kernels::BitPair> tree_edges(const TreeShape& shape) {
  std::vector<kernels::BitPair> edges;
  for (std::size_t v = 1; v < shape.size(); ++v) {
    edges.push_back({static_cast<std::uint32_t>(shape.parent(v)), static_cast<std::uint32_t>(v)});
  }
  return edges;
}

// Joint law of a parent spin x and child spin y with density
// exp(beta*x*y + a*x + b*y); returns E[x*y].
double pair_moment(double beta, double a, double b) {
  const double e[4] = {beta + a + b, -beta + a - b, -beta - a + b, beta - a - b};
  const double top = *std::max_element(e, e + 4);
  double w[4];
  for (int i = 0; i < 4; ++i) w[i] = std::exp(e[i] - top);
  return (w[0] - w[1] - w[2] + w[3]) / (w[0] + w[1] + w[2] + w[3]);
}

void require_zero_field(const IsingParams& p) {
  validate(p);
  if (p.field != 0.0) throw Error(ErrorCode::nonzero_field, "tree marginals are defined for B = 0");
}

}  // namespace

std::vector<double> leaf_field_table(const IsingParams& p, const TreeShape& shape, double u) {
  const std::size_t n = shape.size();
  if (n > max_table_spins) throw Error(ErrorCode::size_limit, "tree has more than 22 spins");
  const auto edges = tree_edges(shape);
  const double num_edges = static_cast<double>(edges.size());
  const int leaf_depth = shape.depth();
  const std::size_t leaf_begin = shape.level_begin(leaf_depth);
  const double leaves = static_cast<double>(n - leaf_begin);
  const double leaf_field = shape.children_per_vertex(leaf_depth) * u;
  const std::uint32_t leaf_mask =
      static_cast<std::uint32_t>(((std::uint64_t{1} << n) - 1) & ~((std::uint64_t{1} << leaf_begin) - 1));

  // Exponent beta*(E - 2d) + f*(2*pop_leaf - L), shifted by its maximum.
  const double shift = p.beta * num_edges + std::abs(leaf_field) * leaves;
  const std::size_t states = std::size_t{1} << n;
  std::vector<double> table(states);
  constexpr std::size_t chunk = 4096;
  std::vector<std::uint16_t> counts(chunk);
  // Weight depends only on (disagreements, plus leaves): tabulate exp once.
  const std::size_t max_leaf_plus = n - leaf_begin;
  std::vector<double> lut((edges.size() + 1) * (max_leaf_plus + 1));
  for (std::size_t d = 0; d <= edges.size(); ++d) {
    for (std::size_t q = 0; q <= max_leaf_plus; ++q) {
      const double exponent = p.beta * (num_edges - 2.0 * static_cast<double>(d)) +
                              leaf_field * (2.0 * static_cast<double>(q) - leaves) - shift;
      lut[d * (max_leaf_plus + 1) + q] = std::exp(exponent);
    }
  }
  double total = 0.0;
  for (std::size_t base = 0; base < states; base += chunk) {
    const std::size_t len = std::min(chunk, states - base);
    std::span<std::uint16_t> out(counts.data(), len);
    kernels::disagreement_counts(static_cast<std::uint32_t>(base), edges, out);
    for (std::size_t i = 0; i < len; ++i) {
      const auto s = static_cast<std::uint32_t>(base + i);
      const auto q = static_cast<std::size_t>(std::popcount(s & leaf_mask));
      const double w = lut[out[i] * (max_leaf_plus + 1) + q];
      table[base + i] = w;
      total += w;
    }
  }
  for (double& w : table) w /= total;
  return table;
}

TreeMarginal::TreeMarginal(const IsingParams& p, int t, Boundary boundary,
                           std::vector<Component> components, Representation repr)
    : params_(p), shape_(p.k, t), boundary_(boundary), components_(std::move(components)) {
  require_zero_field(p);
  if (components_.empty()) throw Error(ErrorCode::invalid_argument, "marginal needs a component");
  const bool small = shape_.size() <= max_table_spins;
  if (repr == Representation::table && !small) {
    throw Error(ErrorCode::size_limit, "explicit table requested for more than 22 spins");
  }
  if (repr == Representation::messages || !small) return;

  const std::size_t mask = (std::size_t{1} << shape_.size()) - 1;
  if (boundary_ == Boundary::minus || boundary_ == Boundary::mixture) {
    // Built from the plus table by the spin flip so the symmetries are exact.
    const double u = std::abs(components_.front().child_message);
    const auto plus = leaf_field_table(p, shape_, u);
    table_.resize(plus.size());
    for (std::size_t s = 0; s < plus.size(); ++s) {
      table_[s] = boundary_ == Boundary::minus ? plus[mask ^ s] : 0.5 * (plus[s] + plus[mask ^ s]);
    }
    return;
  }
  table_.assign(std::size_t{1} << shape_.size(), 0.0);
  for (const auto& c : components_) {
    const auto part = leaf_field_table(p, shape_, c.child_message);
    for (std::size_t s = 0; s < part.size(); ++s) table_[s] += c.weight * part[s];
  }
}

std::span<const double> TreeMarginal::table() const {
  if (table_.empty()) throw Error(ErrorCode::size_limit, "marginal is held as messages; no explicit table");
  return table_;
}

std::vector<double> TreeMarginal::upward_fields(const Component& c) const {
  const int t = shape_.depth();
  std::vector<double> up(static_cast<std::size_t>(t) + 1);
  up[t] = shape_.children_per_vertex(t) * c.child_message;
  for (int d = t - 1; d >= 0; --d) {
    up[d] = shape_.children_per_vertex(d) * cavity_message(params_.beta, up[d + 1]);
  }
  return up;
}

double TreeMarginal::component_mean(const Component& c, int d) const {
  const auto up = upward_fields(c);
  double down = 0.0;
  for (int level = 1; level <= d; ++level) {
    const double parent_total = up[level - 1] + down;
    down = cavity_message(params_.beta, parent_total - cavity_message(params_.beta, up[level]));
  }
  return std::tanh(up[d] + down);
}

double TreeMarginal::component_edge_moment(const Component& c, int d) const {
  const auto up = upward_fields(c);
  double down = 0.0;
  for (int level = 1; level <= d; ++level) {
    const double parent_total = up[level - 1] + down;
    down = cavity_message(params_.beta, parent_total - cavity_message(params_.beta, up[level]));
  }
  const double parent_cavity = up[d] + down - cavity_message(params_.beta, up[d + 1]);
  return pair_moment(params_.beta, parent_cavity, up[d + 1]);
}

double TreeMarginal::mean_at_depth(int d) const {
  if (d < 0 || d > shape_.depth()) throw Error(ErrorCode::invalid_argument, "depth outside the tree");
  double mean = 0.0;
  for (const auto& c : components_) mean += c.weight * component_mean(c, d);
  return mean;
}

double TreeMarginal::edge_moment(int parent_depth) const {
  if (parent_depth < 0 || parent_depth >= shape_.depth()) {
    throw Error(ErrorCode::invalid_argument, "edge depth outside the tree");
  }
  double moment = 0.0;
  for (const auto& c : components_) moment += c.weight * component_edge_moment(c, parent_depth);
  return moment;
}

void TreeMarginal::write_csv(std::ostream& out) const {
  const auto probs = table();
  out << "# tree marginal k=" << params_.k << " beta=" << params_.beta << " depth=" << depth()
      << " boundary=" << to_string(boundary_) << '\n';
  out << "# spin order: canonical BFS of T_k(t) (root 0, children grouped by parent);"
         " bit p of configuration set <=> spin p = +1\n";
  out << "configuration,probability\n";
  const auto old_precision = out.precision(17);
  for (std::size_t s = 0; s < probs.size(); ++s) out << s << ',' << probs[s] << '\n';
  out.precision(old_precision);
}

namespace {

// Message from each boundary child of a depth-t vertex when depth t_plus is
// frozen to +1.
double plus_child_message(const IsingParams& p, int t, int t_plus) {
  if (t < 0 || t_plus <= t) throw Error(ErrorCode::invalid_argument, "need t_plus > t >= 0");
  double h = std::numeric_limits<double>::infinity();  // depth t_plus
  for (int d = t_plus - 1; d > t; --d) h = (p.k - 1) * cavity_message(p.beta, h);
  return cavity_message(p.beta, h);
}

}  // namespace

TreeMarginal plus_boundary_marginal(const IsingParams& p, int t, int t_plus, Representation repr) {
  require_zero_field(p);
  return TreeMarginal(p, t, Boundary::plus, {{1.0, plus_child_message(p, t, t_plus)}}, repr);
}

TreeMarginal minus_boundary_marginal(const IsingParams& p, int t, int t_plus, Representation repr) {
  require_zero_field(p);
  return TreeMarginal(p, t, Boundary::minus, {{1.0, -plus_child_message(p, t, t_plus)}}, repr);
}

TreeMarginal free_boundary_marginal(const IsingParams& p, int t, int t_plus, Representation repr) {
  require_zero_field(p);
  if (t < 0 || t_plus <= t) throw Error(ErrorCode::invalid_argument, "need t_plus > t >= 0");
  return TreeMarginal(p, t, Boundary::free, {{1.0, 0.0}}, repr);
}

TreeMarginal mixture_marginal(const IsingParams& p, int t, int t_plus, Representation repr) {
  require_zero_field(p);
  const double u = plus_child_message(p, t, t_plus);
  return TreeMarginal(p, t, Boundary::mixture, {{0.5, u}, {0.5, -u}}, repr);
}

TreeMarginal leaf_field_marginal(const IsingParams& p, int t, double h_leaf, Representation repr) {
  require_zero_field(p);
  return TreeMarginal(p, t, Boundary::leaf_field, {{1.0, cavity_message(p.beta, h_leaf)}}, repr);
}

TreeMarginal plus_limit_marginal(const IsingParams& p, int t, Representation repr) {
  const double u = cavity_message(p.beta, solve_fixed_point(p).h);
  return TreeMarginal(p, t, Boundary::plus, {{1.0, u}}, repr);
}

TreeMarginal mixture_limit_marginal(const IsingParams& p, int t, Representation repr) {
  const double u = cavity_message(p.beta, solve_fixed_point(p).h);
  return TreeMarginal(p, t, Boundary::mixture, {{0.5, u}, {0.5, -u}}, repr);
}

}  // namespace ising_lwc
