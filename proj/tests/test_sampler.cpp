#include <doctest.h>

#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ising_lwc/diagnostics.hpp"
#include "ising_lwc/error.hpp"
#include "ising_lwc/sampler.hpp"

using namespace ising_lwc;

namespace {

// Brute-force Boltzmann weights straight from the Hamiltonian.
std::vector<double> brute_force(const RegularGraph& g, const IsingParams& p) {
  const std::size_t n = g.num_vertices();
  std::vector<double> w(std::size_t{1} << n);
  for (std::size_t s = 0; s < w.size(); ++s) {
    auto x = [&](Vertex v) { return (s >> v) & 1U ? 1.0 : -1.0; };
    double h = 0.0;
    for (const auto& e : g.edges()) h += p.beta * x(e.u) * x(e.v);
    for (Vertex v = 0; v < n; ++v) h += p.field * x(v);
    w[s] = std::exp(h);
  }
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= z;
  return w;
}

}  // namespace

TEST_CASE("exact distribution: K4 closed form") {
  for (double beta : {0.0, 0.3, 1.2}) {
    const auto d = exact_distribution(complete_graph_k4(), {3, beta, 0.0});
    const double z = 2 * std::exp(6 * beta) + 8 + 6 * std::exp(-2 * beta);
    CHECK(d.log_partition == doctest::Approx(std::log(z)).epsilon(1e-13));
    CHECK(d.probabilities[15] == doctest::Approx(std::exp(6 * beta) / z).epsilon(1e-13));
    CHECK(d.probabilities[0b0011] == doctest::Approx(std::exp(-2 * beta) / z).epsilon(1e-13));
  }
}

TEST_CASE("exact distribution: brute force with and without field") {
  for (const auto& g : {complete_graph_k4(), petersen_graph(), generate_random_regular(12, 3, 4)}) {
    for (IsingParams p : {IsingParams{3, 0.7, 0.0}, IsingParams{3, 0.4, 0.25}}) {
      const auto d = exact_distribution(g, p);
      const auto ref = brute_force(g, p);
      REQUIRE(d.probabilities.size() == ref.size());
      for (std::size_t s = 0; s < ref.size(); ++s) REQUIRE(d.probabilities[s] == doctest::Approx(ref[s]).epsilon(1e-11));
      CHECK(std::accumulate(d.probabilities.begin(), d.probabilities.end(), 0.0) ==
            doctest::Approx(1.0).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(exact_distribution(generate_random_regular(26, 3, 1), {3, 1.0, 0.0}), Error);
}

TEST_CASE("exact distribution is flip-symmetric at zero field") {
  const auto d = exact_distribution(petersen_graph(), {3, 1.0, 0.0});
  const std::size_t mask = d.probabilities.size() - 1;
  for (std::size_t s = 0; s < d.probabilities.size(); ++s) REQUIRE(d.probabilities[s] == d.probabilities[mask ^ s]);
  CHECK(flip_push_forward(d) == conditional_plus_law(d));
}

TEST_CASE("conditional law lives on positive magnetization") {
  const auto d = exact_distribution(generate_random_regular(10, 3, 2), {3, 0.8, 0.0});
  const auto law = conditional_plus_law(d);
  double total = 0.0;
  for (std::size_t s = 0; s < law.size(); ++s) {
    const int m = 2 * std::popcount(s) - 10;
    if (m <= 0) CHECK(law[s] == 0.0);
    total += law[s];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("samplers are deterministic in the seed") {
  const auto g = generate_random_regular(100, 3, 1);
  for (Algorithm a : {Algorithm::glauber, Algorithm::wolff}) {
    const auto s = default_settings(a, 77);
    const auto x = sample_unconditioned(g, {3, 1.0, 0.0}, 20, s);
    const auto y = sample_unconditioned(g, {3, 1.0, 0.0}, 20, s);
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK(std::equal(x.spins(i).begin(), x.spins(i).end(), y.spins(i).begin()));
    }
    auto other = s;
    other.seed = 78;
    const auto z = sample_unconditioned(g, {3, 1.0, 0.0}, 20, other);
    bool differs = false;
    for (std::size_t i = 0; i < 20; ++i) {
      differs |= !std::equal(x.spins(i).begin(), x.spins(i).end(), z.spins(i).begin());
    }
    CHECK(differs);
  }
}

TEST_CASE("Wolff at beta = 0 flips exactly one site") {
  const auto g = generate_random_regular(50, 3, 3);
  auto state = ChainState::plus_start(50, 9);
  for (int step = 0; step < 20; ++step) {
    const auto before = state.config.magnetization();
    wolff_step(g, {3, 0.0, 0.0}, state);
    CHECK(std::abs(state.config.magnetization() - before) == 2);
  }
  CHECK_THROWS_AS(wolff_step(g, {3, 1.0, 0.1}, state), Error);
}

TEST_CASE("Glauber at huge field saturates") {
  const auto g = generate_random_regular(50, 3, 3);
  auto state = ChainState::random_start(50, 1);
  for (int sweep = 0; sweep < 30; ++sweep) glauber_sweep(g, {3, 0.0, 40.0}, state);
  CHECK(state.config.magnetization() == 50);
}

TEST_CASE("small-graph samplers match the exact law") {
  const auto g = petersen_graph();
  const IsingParams p{3, 0.7, 0.0};
  const auto exact = exact_distribution(g, p).probabilities;
  for (Algorithm a : {Algorithm::glauber, Algorithm::wolff, Algorithm::exact}) {
    const auto batch = sample_unconditioned(g, p, 200000, default_settings(a, 5));
    CHECK(batch.size() == 200000);
    // i.i.d. noise floor at this size is about 0.018.
    CHECK(tv_distance(empirical_distribution(batch), exact) < 0.03);
  }
}

TEST_CASE("conditioning flips negatives and drops zeros") {
  const auto g = complete_graph_k4();
  const auto batch = sample_unconditioned(g, {3, 0.5, 0.0}, 5000, default_settings(Algorithm::exact, 1));
  std::size_t zeros = 0;
  for (std::size_t s = 0; s < batch.size(); ++s) zeros += batch.magnetization(s) == 0;
  const auto cond = sample_conditioned_plus(batch);
  CHECK(cond.meta().conditioned);
  CHECK(cond.size() == batch.size() - zeros);
  for (std::size_t s = 0; s < cond.size(); ++s) {
    CHECK(cond.magnetization(s) > 0);
    CHECK(cond.magnetization(s) == std::accumulate(cond.spins(s).begin(), cond.spins(s).end(), 0));
  }
  CHECK_THROWS_AS(sample_conditioned_plus(cond), Error);
  const auto with_field = sample_unconditioned(g, {3, 0.5, 0.2}, 10, default_settings(Algorithm::glauber, 1));
  CHECK_THROWS_AS(sample_conditioned_plus(with_field), Error);
}

TEST_CASE("batch CSV round trip") {
  const auto g = petersen_graph();
  const auto batch = sample_unconditioned(g, {3, 0.7, 0.0}, 50, default_settings(Algorithm::wolff, 3));
  std::stringstream ss;
  write_batch_csv(ss, batch);
  const auto back = read_batch_csv(ss);
  CHECK(back.size() == batch.size());
  CHECK(back.num_vertices() == 10);
  CHECK(back.meta().graph_hash == g.hash_hex());
  CHECK(back.meta().beta == 0.7);
  CHECK(back.meta().algorithm == Algorithm::wolff);
  CHECK(back.meta().seed == 3);
  CHECK_FALSE(back.meta().conditioned);
  for (std::size_t s = 0; s < batch.size(); ++s) {
    CHECK(std::equal(batch.spins(s).begin(), batch.spins(s).end(), back.spins(s).begin()));
  }
  std::stringstream bad("# n=3\n1,1,2\n");
  CHECK_THROWS_AS(read_batch_csv(bad), Error);
}

TEST_CASE("algorithm and start names") {
  for (Algorithm a : {Algorithm::glauber, Algorithm::wolff, Algorithm::exact}) CHECK(parse_algorithm(to_string(a)) == a);
  for (Start s : {Start::all_plus, Start::random}) CHECK(parse_start(to_string(s)) == s);
  CHECK_THROWS_AS(parse_algorithm("metropolis"), Error);
  CHECK(default_algorithm({3, 1.0, 0.0}) == Algorithm::wolff);
  CHECK(default_algorithm({3, 0.3, 0.0}) == Algorithm::glauber);
  CHECK(default_algorithm({3, 1.0, 0.1}) == Algorithm::glauber);
}
