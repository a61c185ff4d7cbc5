#include "ising_lwc/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "ising_lwc/error.hpp"
#include "ising_lwc/kernels.hpp"

namespace ising_lwc {

SpinConfig::SpinConfig(std::vector<std::int8_t> spins) : spins_(std::move(spins)) {
  for (auto s : spins_) {
    if (s != 1 && s != -1) throw Error(ErrorCode::invalid_argument, "spins must be +1 or -1");
  }
  magnetization_ = kernels::spin_sum(spins_);
}

SpinConfig SpinConfig::all_plus(std::size_t n) { return SpinConfig(std::vector<std::int8_t>(n, 1)); }

void SpinConfig::flip_all() noexcept {
  for (auto& s : spins_) s = static_cast<std::int8_t>(-s);
  magnetization_ = -magnetization_;
}

ChainState ChainState::random_start(std::size_t n, std::uint64_t seed) {
  ChainState st;
  st.rng.seed(seed);
  std::vector<std::int8_t> spins(n);
  for (auto& s : spins) s = (st.rng() >> 63) ? 1 : -1;
  st.config = SpinConfig(std::move(spins));
  return st;
}

ChainState ChainState::plus_start(std::size_t n, std::uint64_t seed) {
  ChainState st;
  st.rng.seed(seed);
  st.config = SpinConfig::all_plus(n);
  return st;
}

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vertex uniform_site(std::mt19937_64& rng, std::size_t n) {
  return static_cast<Vertex>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
}

void check_sizes(const RegularGraph& g, const IsingParams& p, const ChainState& state) {
  if (state.config.size() != g.num_vertices()) {
    throw Error(ErrorCode::invalid_argument, "chain state size does not match the graph");
  }
  if (p.k != g.degree()) throw Error(ErrorCode::invalid_argument, "IsingParams.k differs from graph degree");
}

}  // namespace

void glauber_sweep(const RegularGraph& g, const IsingParams& p, ChainState& state) {
  check_sizes(g, p, state);
  const int k = g.degree();
  // P(+1) indexed by the neighbor sum + k.
  std::vector<double> plus_prob(static_cast<std::size_t>(2 * k + 1));
  for (int s = -k; s <= k; ++s) {
    plus_prob[static_cast<std::size_t>(s + k)] = 1.0 / (1.0 + std::exp(-2.0 * p.beta * s - 2.0 * p.field));
  }
  const std::size_t n = g.num_vertices();
  auto& cfg = state.config;
  for (std::size_t step = 0; step < n; ++step) {
    const Vertex i = uniform_site(state.rng, n);
    int sum = 0;
    for (Vertex j : g.neighbors(i)) sum += cfg[j];
    const double u = uniform01(state.rng);
    cfg.set(i, u < plus_prob[static_cast<std::size_t>(sum + k)] ? 1 : -1);
  }
  ++state.sweeps_done;
}

void wolff_step(const RegularGraph& g, const IsingParams& p, ChainState& state) {
  check_sizes(g, p, state);
  if (p.field != 0.0) throw Error(ErrorCode::nonzero_field, "Wolff updates require B = 0");
  const double bond = -std::expm1(-2.0 * p.beta);
  auto& cfg = state.config;
  auto& stack = state.scratch;
  stack.clear();
  const Vertex seed = uniform_site(state.rng, g.num_vertices());
  const std::int8_t s0 = cfg[seed];
  // Spins are flipped on entry, so "still equal to s0" doubles as "not yet in
  // the cluster".
  cfg.flip(seed);
  stack.push_back(seed);
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    for (Vertex w : g.neighbors(v)) {
      if (cfg[w] == s0 && uniform01(state.rng) < bond) {
        cfg.flip(w);
        stack.push_back(w);
      }
    }
  }
  ++state.sweeps_done;
}

ExactDistribution exact_distribution(const RegularGraph& g, const IsingParams& p) {
  validate(p);
  const std::size_t n = g.num_vertices();
  if (n > max_exact_vertices) throw Error(ErrorCode::size_limit, "exact enumeration needs n <= 24");
  std::vector<kernels::BitPair> pairs;
  for (const auto& e : g.edges()) pairs.push_back({e.u, e.v});
  const std::size_t m = pairs.size();
  const double edges = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  const double shift = p.beta * edges + std::abs(p.field) * dn;

  std::vector<double> lut((m + 1) * (n + 1));
  for (std::size_t d = 0; d <= m; ++d) {
    for (std::size_t q = 0; q <= n; ++q) {
      lut[d * (n + 1) + q] = std::exp(p.beta * (edges - 2.0 * static_cast<double>(d)) +
                                      p.field * (2.0 * static_cast<double>(q) - dn) - shift);
    }
  }

  ExactDistribution dist;
  dist.n = n;
  const std::size_t states = std::size_t{1} << n;
  dist.probabilities.resize(states);
  constexpr std::size_t chunk = 4096;
  std::vector<std::uint16_t> counts(chunk);
  double total = 0.0;
  for (std::size_t base = 0; base < states; base += chunk) {
    const std::size_t len = std::min(chunk, states - base);
    std::span<std::uint16_t> out(counts.data(), len);
    kernels::disagreement_counts(static_cast<std::uint32_t>(base), pairs, out);
    for (std::size_t i = 0; i < len; ++i) {
      const auto q = static_cast<std::size_t>(std::popcount(static_cast<std::uint32_t>(base + i)));
      const double w = lut[out[i] * (n + 1) + q];
      dist.probabilities[base + i] = w;
      total += w;
    }
  }
  for (double& w : dist.probabilities) w /= total;
  dist.log_partition = shift + std::log(total);
  return dist;
}

double log_partition(const RegularGraph& g, const IsingParams& p) {
  return exact_distribution(g, p).log_partition;
}

namespace {

std::int64_t index_magnetization(std::size_t state, std::size_t n) {
  return 2 * static_cast<std::int64_t>(std::popcount(state)) - static_cast<std::int64_t>(n);
}

void normalize_over_positive(std::vector<double>& law, std::size_t n) {
  double total = 0.0;
  for (std::size_t s = 0; s < law.size(); ++s) {
    if (index_magnetization(s, n) > 0) total += law[s];
  }
  for (double& w : law) w /= total;
}

}  // namespace

std::vector<double> conditional_plus_law(const ExactDistribution& dist) {
  std::vector<double> law(dist.probabilities.size(), 0.0);
  for (std::size_t s = 0; s < law.size(); ++s) {
    if (index_magnetization(s, dist.n) > 0) law[s] = dist.probabilities[s];
  }
  normalize_over_positive(law, dist.n);
  return law;
}

std::vector<double> flip_push_forward(const ExactDistribution& dist) {
  const std::size_t mask = dist.probabilities.size() - 1;
  std::vector<double> law(dist.probabilities.size(), 0.0);
  for (std::size_t s = 0; s < law.size(); ++s) {
    const auto m = index_magnetization(s, dist.n);
    if (m > 0) {
      law[s] += dist.probabilities[s];
    } else if (m < 0) {
      law[mask ^ s] += dist.probabilities[s];
    }
  }
  normalize_over_positive(law, dist.n);
  return law;
}

const char* to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::glauber: return "glauber";
    case Algorithm::wolff: return "wolff";
    case Algorithm::exact: return "exact";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "glauber") return Algorithm::glauber;
  if (name == "wolff") return Algorithm::wolff;
  if (name == "exact") return Algorithm::exact;
  throw Error(ErrorCode::invalid_argument, "unknown algorithm '" + name + "'");
}

const char* to_string(Start s) noexcept { return s == Start::random ? "random" : "all_plus"; }

Start parse_start(const std::string& name) {
  if (name == "all_plus") return Start::all_plus;
  if (name == "random") return Start::random;
  throw Error(ErrorCode::invalid_argument, "unknown start '" + name + "'");
}

Algorithm default_algorithm(const IsingParams& p) {
  return p.field == 0.0 && !in_uniqueness_regime(p) ? Algorithm::wolff : Algorithm::glauber;
}

SamplerSettings default_settings(Algorithm a, std::uint64_t seed) {
  SamplerSettings s;
  s.algorithm = a;
  s.burn_in = a == Algorithm::glauber ? 100 : a == Algorithm::wolff ? 200 : 0;
  s.thin = 10;
  s.seed = seed;
  return s;
}

SampleBatch::SampleBatch(BatchMeta meta, std::size_t n) : meta_(std::move(meta)), n_(n) {
  meta_.n = n;
}

SpinConfig SampleBatch::config(std::size_t s) const {
  auto row = spins(s);
  return SpinConfig(std::vector<std::int8_t>(row.begin(), row.end()));
}

void SampleBatch::push_back(std::span<const std::int8_t> spins) {
  if (spins.size() != n_) throw Error(ErrorCode::invalid_argument, "configuration size mismatch");
  spins_.insert(spins_.end(), spins.begin(), spins.end());
  magnetizations_.push_back(kernels::spin_sum(spins));
}

void SampleBatch::flip(std::size_t s) {
  auto* row = spins_.data() + s * n_;
  for (std::size_t i = 0; i < n_; ++i) row[i] = static_cast<std::int8_t>(-row[i]);
  magnetizations_[s] = -magnetizations_[s];
}

std::uint64_t config_index(std::span<const std::int8_t> spins) {
  if (spins.size() > 63) throw Error(ErrorCode::size_limit, "configuration index needs n <= 63");
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < spins.size(); ++i) {
    if (spins[i] > 0) idx |= std::uint64_t{1} << i;
  }
  return idx;
}

namespace {

SampleBatch sample_exact(const RegularGraph& g, const IsingParams& p, std::size_t nsamples,
                         BatchMeta meta) {
  const auto dist = exact_distribution(g, p);
  std::vector<double> cdf(dist.probabilities.size());
  std::partial_sum(dist.probabilities.begin(), dist.probabilities.end(), cdf.begin());
  const std::size_t n = g.num_vertices();
  SampleBatch batch(std::move(meta), n);
  batch.reserve(nsamples);
  std::mt19937_64 rng(batch.meta().seed);
  std::vector<std::int8_t> row(n);
  for (std::size_t s = 0; s < nsamples; ++s) {
    const double u = uniform01(rng) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto state = static_cast<std::size_t>(it - cdf.begin());
    for (std::size_t i = 0; i < n; ++i) row[i] = (state >> i) & 1U ? 1 : -1;
    batch.push_back(row);
  }
  return batch;
}

}  // namespace

SampleBatch sample_unconditioned(const RegularGraph& g, const IsingParams& p, std::size_t nsamples,
                                 const SamplerSettings& settings) {
  validate(p);
  if (p.k != g.degree()) throw Error(ErrorCode::invalid_argument, "IsingParams.k differs from graph degree");
  BatchMeta meta;
  meta.graph_hash = g.hash_hex();
  meta.beta = p.beta;
  meta.field = p.field;
  meta.algorithm = settings.algorithm;
  meta.burn_in = settings.burn_in;
  meta.thin = settings.thin;
  meta.seed = settings.seed;
  if (settings.algorithm == Algorithm::exact) return sample_exact(g, p, nsamples, std::move(meta));
  if (settings.algorithm == Algorithm::wolff && p.field != 0.0) {
    throw Error(ErrorCode::nonzero_field, "Wolff updates require B = 0");
  }
  if (settings.thin == 0) throw Error(ErrorCode::invalid_argument, "thin must be at least 1");

  ChainState state = settings.start == Start::random ? ChainState::random_start(g.num_vertices(), settings.seed)
                                                     : ChainState::plus_start(g.num_vertices(), settings.seed);
  const bool wolff = settings.algorithm == Algorithm::wolff;
  auto advance = [&](std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) {
      if (wolff) {
        wolff_step(g, p, state);
      } else {
        glauber_sweep(g, p, state);
      }
    }
  };
  SampleBatch batch(std::move(meta), g.num_vertices());
  batch.reserve(nsamples);
  advance(settings.burn_in);
  for (std::size_t s = 0; s < nsamples; ++s) {
    advance(settings.thin);
    if (wolff && settings.random_global_flip && (state.rng() >> 63)) state.config.flip_all();
    batch.push_back(state.config);
  }
  return batch;
}

SampleBatch sample_conditioned_plus(SampleBatch&& batch) {
  if (batch.meta().field != 0.0) {
    throw Error(ErrorCode::nonzero_field, "sign conditioning by flipping requires B = 0");
  }
  if (batch.meta().conditioned) throw Error(ErrorCode::invalid_argument, "batch is already conditioned");
  for (std::size_t s = 0; s < batch.size(); ++s) {
    if (batch.magnetization(s) < 0) batch.flip(s);
  }
  batch.retain([&batch](std::size_t s) { return batch.magnetization(s) > 0; });
  batch.meta().conditioned = true;
  return std::move(batch);
}

SampleBatch sample_conditioned_plus(const SampleBatch& batch) {
  return sample_conditioned_plus(SampleBatch(batch));
}

std::vector<double> empirical_distribution(const SampleBatch& batch) {
  const std::size_t n = batch.num_vertices();
  if (n > max_exact_vertices) throw Error(ErrorCode::size_limit, "empirical table needs n <= 24");
  if (batch.empty()) throw Error(ErrorCode::invalid_argument, "empty batch");
  std::vector<double> law(std::size_t{1} << n, 0.0);
  for (std::size_t s = 0; s < batch.size(); ++s) law[config_index(batch.spins(s))] += 1.0;
  for (double& w : law) w /= static_cast<double>(batch.size());
  return law;
}

}  // namespace ising_lwc
