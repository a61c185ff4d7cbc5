#pragma once

// Statistics of sample batches against tree references: ball-law total
// variation (vertex-averaged and per vertex), edge agreement, the minus-phase
// census F, anticoncentration of the magnetization, and variances of local
// averages.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "ising_lwc/graph.hpp"
#include "ising_lwc/sampler.hpp"
#include "ising_lwc/tree_gibbs.hpp"

namespace ising_lwc {

/// Radius-t balls of every vertex, ordered for pattern indexing. A
/// tree-shaped ball is listed in canonical T_k(t) position order (so its
/// patterns index TreeMarginal tables directly); any other ball keeps the
/// BFS order of Ball::vertices.
class BallIndex {
 public:
  BallIndex(const RegularGraph& g, int t);

  int radius() const noexcept { return t_; }
  std::size_t num_vertices() const noexcept { return tree_shaped_.size(); }
  bool tree_shaped(Vertex i) const noexcept { return tree_shaped_[i] != 0; }
  std::span<const Vertex> vertices(Vertex i) const noexcept {
    return {members_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  double tree_fraction() const noexcept;

 private:
  int t_;
  std::vector<std::size_t> offsets_;
  std::vector<Vertex> members_;
  std::vector<std::uint8_t> tree_shaped_;
};

/// Bit p set <=> spins[order[p]] = +1.
std::uint32_t ball_pattern(std::span<const std::int8_t> spins, std::span<const Vertex> order);

struct BallLaw {
  Vertex center = 0;
  int t = 0;
  bool tree_shaped = false;
  /// Host vertices in the order used for pattern bits.
  std::vector<Vertex> order;
  std::vector<double> probabilities;
};

inline constexpr std::size_t max_ball_law_spins = 22;

BallLaw empirical_ball_law(const SampleBatch& batch, const RegularGraph& g, Vertex i, int t);

/// (1/2) sum |P - Q| over a common index set; throws on size mismatch.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// TV between the vertex-averaged ball law and delta_{T_k(t)} x ref: the
/// mass of non-tree balls counts in full.
double mode_A_statistic(const SampleBatch& batch, const RegularGraph& g, int t, const TreeMarginal& ref);
double mode_A_statistic(const SampleBatch& batch, const BallIndex& balls, const TreeMarginal& ref);

struct ModeCResult {
  /// Per-vertex TV between the empirical ball law and ref (1 for non-tree balls).
  std::vector<double> per_vertex_tv;
  double epsilon = 0.0;
  double exceed_fraction = 0.0;
  double mean_tv = 0.0;
};

ModeCResult mode_C_statistic(const SampleBatch& batch, const RegularGraph& g, int t, const TreeMarginal& ref,
                             double epsilon);
ModeCResult mode_C_statistic(const SampleBatch& batch, const BallIndex& balls, const TreeMarginal& ref,
                             double epsilon);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// (2/(n k)) sum over edges of the batch mean of x_i x_j. Standard error from
/// batch means over about sqrt(N) consecutive blocks, so chain
/// autocorrelation is accounted for.
Estimate edge_agreement(const SampleBatch& batch, const RegularGraph& g);

/// Mean and batch-means standard error of a per-sample series.
Estimate batch_means(std::span<const double> series);

/// 1 iff sum over B_i(ell) of x_j <= -delta |B_i(ell)|.
int f_indicator(std::span<const std::int8_t> spins, const RegularGraph& g, Vertex i, int ell, double delta);
int f_indicator(std::span<const std::int8_t> spins, const BallIndex& balls, Vertex i, double delta);

/// (1/n) sum_i F_i.
double f_census(std::span<const std::int8_t> spins, const RegularGraph& g, int ell, double delta);
double f_census(std::span<const std::int8_t> spins, const BallIndex& balls, double delta);
/// Large-n bound on the census of a configuration with M >= 0.
double f_census_bound(double delta);

/// Fraction of edges whose endpoints disagree on F.
double f_disagreement(std::span<const std::int8_t> spins, const RegularGraph& g, int ell, double delta);
double f_disagreement(std::span<const std::int8_t> spins, const RegularGraph& g, const BallIndex& balls,
                      double delta);

/// Mean F-census over a conditioned batch: the weight of the minus component.
double q_hat(const SampleBatch& conditioned, const RegularGraph& g, int ell, double delta);
double q_hat(const SampleBatch& conditioned, const BallIndex& balls, double delta);

struct Anticoncentration {
  double statistic = 0.0;        ///< sup_m P(M = m) * sqrt(I)
  double sup_probability = 0.0;  ///< sup_m P(M = m)
  std::size_t independent_set = 0;
  bool degenerate = false;  ///< only one magnetization value observed
};

Anticoncentration anticoncentration(const SampleBatch& batch, const RegularGraph& g);

enum class LocalFunction {
  constant,        ///< f_i = 1
  magnetization,   ///< f_i = x_i
  edge_agreement,  ///< f_i = (1/k) sum_{j ~ i} x_i x_j, supported on B_i(1)
};

const char* to_string(LocalFunction f) noexcept;
LocalFunction parse_local_function(const std::string& name);
/// Radius a local function reads.
int support_radius(LocalFunction f) noexcept;

using LocalFunctionFn = std::function<double(const RegularGraph&, std::span<const std::int8_t>, Vertex)>;

/// Unbiased sample variance, across the batch, of (1/n) sum_i f_i(x). The
/// built-in families require ell >= support_radius(f).
double local_average_variance(const SampleBatch& batch, const RegularGraph& g, LocalFunction f, int ell);
double local_average_variance(const SampleBatch& batch, const RegularGraph& g, const LocalFunctionFn& f);

}  // namespace ising_lwc
