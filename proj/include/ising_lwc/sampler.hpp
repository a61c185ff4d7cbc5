#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ising_lwc/graph.hpp"
#include "ising_lwc/tree_gibbs.hpp"

namespace ising_lwc {

/// Spin configuration with its magnetization kept in sync.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::vector<std::int8_t> spins);
  static SpinConfig all_plus(std::size_t n);

  std::size_t size() const noexcept { return spins_.size(); }
  std::span<const std::int8_t> spins() const noexcept { return spins_; }
  std::int8_t operator[](std::size_t i) const noexcept { return spins_[i]; }
  std::int64_t magnetization() const noexcept { return magnetization_; }

  void set(std::size_t i, std::int8_t s) noexcept {
    magnetization_ += s - spins_[i];
    spins_[i] = s;
  }
  void flip(std::size_t i) noexcept { set(i, static_cast<std::int8_t>(-spins_[i])); }
  void flip_all() noexcept;

 private:
  std::vector<std::int8_t> spins_;
  std::int64_t magnetization_ = 0;
};

/// A Markov chain in progress. Not shareable between threads; each chain owns
/// its generator, so evolution is a pure function of the seed.
struct ChainState {
  SpinConfig config;
  std::mt19937_64 rng;
  std::uint64_t sweeps_done = 0;
  std::vector<Vertex> scratch;  // cluster stack for Wolff

  /// Uniformly random initial configuration drawn from the chain's own rng.
  static ChainState random_start(std::size_t n, std::uint64_t seed);
  static ChainState plus_start(std::size_t n, std::uint64_t seed);
};

/// n random-scan heat-bath updates: site i becomes +1 with probability
/// 1 / (1 + exp(-2 beta sum_{j~i} x_j - 2B)).
void glauber_sweep(const RegularGraph& g, const IsingParams& p, ChainState& state);

/// One Wolff cluster flip (B = 0 only; throws nonzero-field otherwise).
void wolff_step(const RegularGraph& g, const IsingParams& p, ChainState& state);

struct ExactDistribution {
  std::size_t n = 0;
  /// Indexed by configuration; bit i set <=> x_i = +1.
  std::vector<double> probabilities;
  double log_partition = 0.0;
};

inline constexpr std::size_t max_exact_vertices = 24;

/// mu_n by enumeration (n <= 24), including log Z_n.
ExactDistribution exact_distribution(const RegularGraph& g, const IsingParams& p);
double log_partition(const RegularGraph& g, const IsingParams& p);

/// mu_n restricted to {M > 0} and renormalized.
std::vector<double> conditional_plus_law(const ExactDistribution& dist);
/// Law of the output of the flip map (M < 0 flipped, M = 0 dropped) applied
/// to an exact draw from mu_n.
std::vector<double> flip_push_forward(const ExactDistribution& dist);

enum class Algorithm { glauber, wolff, exact };

const char* to_string(Algorithm a) noexcept;
Algorithm parse_algorithm(const std::string& name);
/// Wolff in the non-uniqueness regime at B = 0, Glauber otherwise.
Algorithm default_algorithm(const IsingParams& p);

enum class Start { all_plus, random };

const char* to_string(Start s) noexcept;
Start parse_start(const std::string& name);

struct SamplerSettings {
  Algorithm algorithm = Algorithm::wolff;
  Start start = Start::all_plus;
  std::size_t burn_in = 200;  ///< sweeps or cluster steps
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  /// Wolff only: before each recorded sample, flip every spin with
  /// probability 1/2 (a move that preserves mu_n at B = 0).
  bool random_global_flip = true;
};

/// Default burn-in for an algorithm: 200 Wolff steps or 100 Glauber sweeps.
SamplerSettings default_settings(Algorithm a, std::uint64_t seed);

struct BatchMeta {
  std::string graph_hash;
  std::size_t n = 0;
  double beta = 0.0;
  double field = 0.0;
  Algorithm algorithm = Algorithm::wolff;
  std::size_t burn_in = 0;
  std::size_t thin = 0;
  std::uint64_t seed = 0;
  bool conditioned = false;
};

/// Configurations stored row-major in one buffer (row s = sample s).
class SampleBatch {
 public:
  SampleBatch() = default;
  SampleBatch(BatchMeta meta, std::size_t n);

  const BatchMeta& meta() const noexcept { return meta_; }
  BatchMeta& meta() noexcept { return meta_; }
  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t size() const noexcept { return magnetizations_.size(); }
  bool empty() const noexcept { return magnetizations_.empty(); }

  std::span<const std::int8_t> spins(std::size_t s) const noexcept {
    return {spins_.data() + s * n_, n_};
  }
  std::int64_t magnetization(std::size_t s) const noexcept { return magnetizations_[s]; }
  std::span<const std::int64_t> magnetizations() const noexcept { return magnetizations_; }
  SpinConfig config(std::size_t s) const;

  void push_back(std::span<const std::int8_t> spins);
  void push_back(const SpinConfig& c) { push_back(c.spins()); }
  void reserve(std::size_t samples) { spins_.reserve(samples * n_); magnetizations_.reserve(samples); }

  /// Flips sample s in place (used by conditioning).
  void flip(std::size_t s);
  /// Keeps the samples for which keep(s) is true, preserving order.
  template <class Pred>
  void retain(Pred keep);

 private:
  BatchMeta meta_;
  std::size_t n_ = 0;
  std::vector<std::int8_t> spins_;
  std::vector<std::int64_t> magnetizations_;
};

template <class Pred>
void SampleBatch::retain(Pred keep) {
  std::size_t out = 0;
  for (std::size_t s = 0; s < size(); ++s) {
    if (!keep(s)) continue;
    if (out != s) {
      std::copy_n(spins_.begin() + static_cast<std::ptrdiff_t>(s * n_), n_,
                  spins_.begin() + static_cast<std::ptrdiff_t>(out * n_));
      magnetizations_[out] = magnetizations_[s];
    }
    ++out;
  }
  spins_.resize(out * n_);
  magnetizations_.resize(out);
}

/// Seeded, thinned batch from mu_n: burn_in steps, then `thin` steps before
/// each recorded sample. Algorithm::exact draws i.i.d. from the exact table.
SampleBatch sample_unconditioned(const RegularGraph& g, const IsingParams& p, std::size_t nsamples,
                                 const SamplerSettings& settings);

/// Exact sample of mu_{n,+} from an exact sample of mu_n (B = 0): negative
/// magnetization is flipped, zero magnetization is dropped.
SampleBatch sample_conditioned_plus(const SampleBatch& batch);
SampleBatch sample_conditioned_plus(SampleBatch&& batch);

/// Empirical law over {-1,+1}^n (n <= 24), same indexing as ExactDistribution.
std::vector<double> empirical_distribution(const SampleBatch& batch);

/// Bit-packed configuration index of a spin row (n <= 63).
std::uint64_t config_index(std::span<const std::int8_t> spins);

/// CSV: "# key=value" metadata lines, then one row of comma-separated ±1
/// spins per sample.
void write_batch_csv(std::ostream& out, const SampleBatch& batch);
SampleBatch read_batch_csv(std::istream& in);

}  // namespace ising_lwc
