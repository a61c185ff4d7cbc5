#include "ising_lwc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ising_lwc/error.hpp"
#include "ising_lwc/kernels.hpp"

namespace ising_lwc {

BallIndex::BallIndex(const RegularGraph& g, int t) : t_(t) {
  if (t < 0) throw Error(ErrorCode::invalid_argument, "negative radius");
  const std::size_t n = g.num_vertices();
  offsets_.reserve(n + 1);
  offsets_.push_back(0);
  tree_shaped_.resize(n);
  for (Vertex i = 0; i < n; ++i) {
    const Ball b = ball(g, i, t);
    auto order = tree_order(b, g.degree());
    tree_shaped_[i] = order.has_value();
    const auto& members = order ? *order : b.vertices;
    members_.insert(members_.end(), members.begin(), members.end());
    offsets_.push_back(members_.size());
  }
}

double BallIndex::tree_fraction() const noexcept {
  std::size_t count = 0;
  for (auto f : tree_shaped_) count += f;
  return static_cast<double>(count) / static_cast<double>(tree_shaped_.size());
}

std::uint32_t ball_pattern(std::span<const std::int8_t> spins, std::span<const Vertex> order) {
  std::uint32_t pattern = 0;
  for (std::size_t p = 0; p < order.size(); ++p) {
    pattern |= static_cast<std::uint32_t>(spins[order[p]] > 0) << p;
  }
  return pattern;
}

BallLaw empirical_ball_law(const SampleBatch& batch, const RegularGraph& g, Vertex i, int t) {
  if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
  if (batch.num_vertices() != g.num_vertices()) throw Error(ErrorCode::invalid_argument, "batch/graph size mismatch");
  const Ball b = ball(g, i, t);
  BallLaw law;
  law.center = i;
  law.t = t;
  auto order = tree_order(b, g.degree());
  law.tree_shaped = order.has_value();
  law.order = order ? std::move(*order) : b.vertices;
  if (law.order.size() > max_ball_law_spins) throw Error(ErrorCode::size_limit, "ball has more than 22 spins");
  law.probabilities.assign(std::size_t{1} << law.order.size(), 0.0);
  for (std::size_t s = 0; s < batch.size(); ++s) law.probabilities[ball_pattern(batch.spins(s), law.order)] += 1.0;
  for (double& w : law.probabilities) w /= static_cast<double>(batch.size());
  return law;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::invalid_argument, "tables differ in size");
  return 0.5 * kernels::abs_diff_sum(p, q);
}

namespace {

void check_reference(const SampleBatch& batch, const BallIndex& balls, const TreeMarginal& ref) {
  if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
  if (batch.num_vertices() != balls.num_vertices()) {
    throw Error(ErrorCode::invalid_argument, "batch/graph size mismatch");
  }
  if (ref.depth() != balls.radius()) throw Error(ErrorCode::invalid_argument, "reference depth differs from t");
  if (!ref.has_table()) throw Error(ErrorCode::size_limit, "reference marginal has no explicit table");
}

// Calls visit(vertex, patterns) for every tree-shaped vertex, where patterns
// holds that vertex's ball pattern in each sample. Vertices are processed in
// blocks so each sample row is read once per block.
template <class Visit>
void for_each_tree_ball(const SampleBatch& batch, const BallIndex& balls, Visit visit) {
  constexpr std::size_t block = 256;
  const std::size_t n = balls.num_vertices();
  const std::size_t samples = batch.size();
  std::vector<std::uint32_t> patterns(block * samples);
  std::vector<Vertex> members;
  for (std::size_t lo = 0; lo < n; lo += block) {
    members.clear();
    for (std::size_t v = lo; v < std::min(n, lo + block); ++v) {
      if (balls.tree_shaped(static_cast<Vertex>(v))) members.push_back(static_cast<Vertex>(v));
    }
    for (std::size_t s = 0; s < samples; ++s) {
      const auto row = batch.spins(s);
      for (std::size_t m = 0; m < members.size(); ++m) {
        patterns[m * samples + s] = ball_pattern(row, balls.vertices(members[m]));
      }
    }
    for (std::size_t m = 0; m < members.size(); ++m) {
      visit(members[m], std::span<const std::uint32_t>(patterns.data() + m * samples, samples));
    }
  }
}

}  // namespace

double mode_A_statistic(const SampleBatch& batch, const BallIndex& balls, const TreeMarginal& ref) {
  check_reference(batch, balls, ref);
  const auto nu = ref.table();
  std::vector<std::uint64_t> counts(nu.size(), 0);
  for_each_tree_ball(batch, balls, [&](Vertex, std::span<const std::uint32_t> pats) {
    for (auto x : pats) ++counts[x];
  });
  const double total = static_cast<double>(batch.size()) * static_cast<double>(balls.num_vertices());
  std::vector<double> averaged(nu.size());
  for (std::size_t x = 0; x < nu.size(); ++x) averaged[x] = static_cast<double>(counts[x]) / total;
  const double non_tree = 1.0 - balls.tree_fraction();
  return 0.5 * (kernels::abs_diff_sum(averaged, nu) + non_tree);
}

double mode_A_statistic(const SampleBatch& batch, const RegularGraph& g, int t, const TreeMarginal& ref) {
  return mode_A_statistic(batch, BallIndex(g, t), ref);
}

ModeCResult mode_C_statistic(const SampleBatch& batch, const BallIndex& balls, const TreeMarginal& ref,
                             double epsilon) {
  check_reference(batch, balls, ref);
  const auto nu = ref.table();
  ModeCResult result;
  result.epsilon = epsilon;
  result.per_vertex_tv.assign(balls.num_vertices(), 1.0);
  const double samples = static_cast<double>(batch.size());
  std::vector<std::uint32_t> counts(nu.size(), 0);
  std::vector<std::uint32_t> touched;
  for_each_tree_ball(batch, balls, [&](Vertex v, std::span<const std::uint32_t> pats) {
    touched.clear();
    for (auto x : pats) {
      if (counts[x]++ == 0) touched.push_back(x);
    }
    // Unobserved patterns contribute nu(x) each, i.e. 1 - (observed nu mass).
    double diff = 0.0;
    double seen_mass = 0.0;
    std::sort(touched.begin(), touched.end());
    for (auto x : touched) {
      diff += std::abs(counts[x] / samples - nu[x]);
      seen_mass += nu[x];
      counts[x] = 0;
    }
    result.per_vertex_tv[v] = std::clamp(0.5 * (diff + std::max(0.0, 1.0 - seen_mass)), 0.0, 1.0);
  });
  std::size_t exceed = 0;
  double sum = 0.0;
  for (double tv : result.per_vertex_tv) {
    exceed += tv > epsilon;
    sum += tv;
  }
  const double n = static_cast<double>(balls.num_vertices());
  result.exceed_fraction = static_cast<double>(exceed) / n;
  result.mean_tv = sum / n;
  return result;
}

ModeCResult mode_C_statistic(const SampleBatch& batch, const RegularGraph& g, int t, const TreeMarginal& ref,
                             double epsilon) {
  return mode_C_statistic(batch, BallIndex(g, t), ref, epsilon);
}

Estimate batch_means(std::span<const double> series) {
  Estimate e;
  const std::size_t n = series.size();
  if (n == 0) throw Error(ErrorCode::invalid_argument, "empty series");
  double total = 0.0;
  for (double x : series) total += x;
  e.mean = total / static_cast<double>(n);
  const auto blocks = static_cast<std::size_t>(std::sqrt(static_cast<double>(n)));
  if (blocks < 2) return e;
  const std::size_t len = n / blocks;
  std::vector<double> means(blocks, 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) means[b] += series[i];
    means[b] /= static_cast<double>(len);
  }
  double mu = 0.0;
  for (double m : means) mu += m;
  mu /= static_cast<double>(blocks);
  double var = 0.0;
  for (double m : means) var += (m - mu) * (m - mu);
  var /= static_cast<double>(blocks - 1);
  e.std_error = std::sqrt(var / static_cast<double>(blocks));
  return e;
}

Estimate edge_agreement(const SampleBatch& batch, const RegularGraph& g) {
  if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
  if (batch.num_vertices() != g.num_vertices()) throw Error(ErrorCode::invalid_argument, "batch/graph size mismatch");
  const auto edges = g.edges();
  std::vector<double> per_sample(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto x = batch.spins(s);
    long agree = 0;
    for (const auto& e : edges) agree += x[e.u] * x[e.v];
    per_sample[s] = static_cast<double>(agree) / static_cast<double>(edges.size());
  }
  return batch_means(per_sample);
}

namespace {

int f_from_ball(std::span<const std::int8_t> spins, std::span<const Vertex> members, double delta) {
  long sum = 0;
  for (Vertex j : members) sum += spins[j];
  return static_cast<double>(sum) <= -delta * static_cast<double>(members.size()) ? 1 : 0;
}

void check_row(std::span<const std::int8_t> spins, std::size_t n) {
  if (spins.size() != n) throw Error(ErrorCode::invalid_argument, "configuration/graph size mismatch");
}

}  // namespace

int f_indicator(std::span<const std::int8_t> spins, const BallIndex& balls, Vertex i, double delta) {
  check_row(spins, balls.num_vertices());
  return f_from_ball(spins, balls.vertices(i), delta);
}

int f_indicator(std::span<const std::int8_t> spins, const RegularGraph& g, Vertex i, int ell, double delta) {
  check_row(spins, g.num_vertices());
  return f_from_ball(spins, ball(g, i, ell).vertices, delta);
}

double f_census(std::span<const std::int8_t> spins, const BallIndex& balls, double delta) {
  check_row(spins, balls.num_vertices());
  std::size_t count = 0;
  for (Vertex i = 0; i < balls.num_vertices(); ++i) count += f_from_ball(spins, balls.vertices(i), delta);
  return static_cast<double>(count) / static_cast<double>(balls.num_vertices());
}

double f_census(std::span<const std::int8_t> spins, const RegularGraph& g, int ell, double delta) {
  return f_census(spins, BallIndex(g, ell), delta);
}

double f_census_bound(double delta) { return 1.0 / (1.0 + delta / 2.0); }

double f_disagreement(std::span<const std::int8_t> spins, const RegularGraph& g, const BallIndex& balls,
                      double delta) {
  check_row(spins, g.num_vertices());
  std::vector<std::uint8_t> f(g.num_vertices());
  for (Vertex i = 0; i < g.num_vertices(); ++i) f[i] = static_cast<std::uint8_t>(f_from_ball(spins, balls.vertices(i), delta));
  std::size_t differ = 0;
  for (const auto& e : g.edges()) differ += f[e.u] != f[e.v];
  return static_cast<double>(differ) / static_cast<double>(g.num_edges());
}

double f_disagreement(std::span<const std::int8_t> spins, const RegularGraph& g, int ell, double delta) {
  return f_disagreement(spins, g, BallIndex(g, ell), delta);
}

double q_hat(const SampleBatch& conditioned, const BallIndex& balls, double delta) {
  if (!conditioned.meta().conditioned) {
    throw Error(ErrorCode::invalid_argument, "q_hat needs a sign-conditioned batch");
  }
  if (conditioned.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
  double total = 0.0;
  for (std::size_t s = 0; s < conditioned.size(); ++s) total += f_census(conditioned.spins(s), balls, delta);
  return total / static_cast<double>(conditioned.size());
}

double q_hat(const SampleBatch& conditioned, const RegularGraph& g, int ell, double delta) {
  return q_hat(conditioned, BallIndex(g, ell), delta);
}

Anticoncentration anticoncentration(const SampleBatch& batch, const RegularGraph& g) {
  if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
  std::map<std::int64_t, std::size_t> counts;
  for (auto m : batch.magnetizations()) ++counts[m];
  std::size_t top = 0;
  for (const auto& [m, c] : counts) top = std::max(top, c);
  Anticoncentration a;
  a.sup_probability = static_cast<double>(top) / static_cast<double>(batch.size());
  a.independent_set = greedy_independent_set(g).size();
  a.statistic = a.sup_probability * std::sqrt(static_cast<double>(a.independent_set));
  a.degenerate = counts.size() == 1;
  return a;
}

const char* to_string(LocalFunction f) noexcept {
  switch (f) {
    case LocalFunction::constant: return "constant";
    case LocalFunction::magnetization: return "magnetization";
    case LocalFunction::edge_agreement: return "edge_agreement";
  }
  return "?";
}

LocalFunction parse_local_function(const std::string& name) {
  if (name == "constant") return LocalFunction::constant;
  if (name == "magnetization") return LocalFunction::magnetization;
  if (name == "edge_agreement") return LocalFunction::edge_agreement;
  throw Error(ErrorCode::invalid_argument, "unknown local function '" + name + "'");
}

int support_radius(LocalFunction f) noexcept {
  switch (f) {
    case LocalFunction::constant: return 0;
    case LocalFunction::magnetization: return 0;
    case LocalFunction::edge_agreement: return 1;
  }
  return 0;
}

namespace {

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorCode::invalid_argument, "variance needs at least two samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

double local_average_variance(const SampleBatch& batch, const RegularGraph& g, LocalFunction f, int ell) {
  if (ell < support_radius(f)) throw Error(ErrorCode::invalid_argument, "ell is below the support radius");
  if (batch.num_vertices() != g.num_vertices()) throw Error(ErrorCode::invalid_argument, "batch/graph size mismatch");
  const double n = static_cast<double>(g.num_vertices());
  std::vector<double> averages(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    switch (f) {
      case LocalFunction::constant:
        averages[s] = 1.0;
        break;
      case LocalFunction::magnetization:
        averages[s] = static_cast<double>(batch.magnetization(s)) / n;
        break;
      case LocalFunction::edge_agreement: {
        // Each edge is seen from both endpoints: (1/n) sum_i (1/k) sum_j = (2/(nk)) sum_E.
        const auto x = batch.spins(s);
        long agree = 0;
        for (const auto& e : g.edges()) agree += x[e.u] * x[e.v];
        averages[s] = 2.0 * static_cast<double>(agree) / (n * g.degree());
        break;
      }
    }
  }
  return sample_variance(averages);
}

double local_average_variance(const SampleBatch& batch, const RegularGraph& g, const LocalFunctionFn& f) {
  if (batch.num_vertices() != g.num_vertices()) throw Error(ErrorCode::invalid_argument, "batch/graph size mismatch");
  std::vector<double> averages(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto x = batch.spins(s);
    double total = 0.0;
    for (Vertex i = 0; i < g.num_vertices(); ++i) total += f(g, x, i);
    averages[s] = total / static_cast<double>(g.num_vertices());
  }
  return sample_variance(averages);
}

}  // namespace ising_lwc
