#include <doctest.h>

#include <cmath>
#include <random>

#include "ising_lwc/diagnostics.hpp"
#include "ising_lwc/error.hpp"

using namespace ising_lwc;

namespace {

SampleBatch constant_batch(std::size_t n, std::int8_t spin, std::size_t samples, bool conditioned = false) {
  BatchMeta meta;
  meta.conditioned = conditioned;
  SampleBatch b(meta, n);
  std::vector<std::int8_t> row(n, spin);
  for (std::size_t s = 0; s < samples; ++s) b.push_back(row);
  return b;
}

SampleBatch random_batch(std::size_t n, std::size_t samples, double p_plus, std::uint64_t seed) {
  SampleBatch b(BatchMeta{}, n);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p_plus);
  std::vector<std::int8_t> row(n);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& x : row) x = coin(rng) ? 1 : -1;
    b.push_back(row);
  }
  return b;
}

}  // namespace

TEST_CASE("total variation is a metric on tables") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&] {
    std::vector<double> p(37);
    double z = 0.0;
    for (auto& x : p) z += (x = u(rng));
    for (auto& x : p) x /= z;
    return p;
  };
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = draw();
    const auto q = draw();
    const auto r = draw();
    CHECK(tv_distance(p, p) == 0.0);
    CHECK(tv_distance(p, q) == doctest::Approx(tv_distance(q, p)).epsilon(1e-14));
    CHECK(tv_distance(p, r) <= tv_distance(p, q) + tv_distance(q, r) + 1e-14);
    CHECK(tv_distance(p, q) <= 1.0);
  }
  const std::vector<double> a{1.0, 0.0, 0.0};
  const std::vector<double> b{0.0, 0.0, 1.0};
  CHECK(tv_distance(a, b) == 1.0);
  CHECK_THROWS_AS(tv_distance(a, std::vector<double>{1.0}), Error);
}

TEST_CASE("mode A against a point-mass batch") {
  const auto g = generate_random_regular(2000, 3, 8);
  const IsingParams p{3, 1.0, 0.0};
  for (int t : {1, 2}) {
    const auto ref = plus_limit_marginal(p, t);
    const auto nu = ref.table();
    const double tf = tree_likeness_fraction(g, t);
    const double all_plus = nu.back();
    const double expected = 0.5 * (std::abs(tf - all_plus) + (1.0 - all_plus) + (1.0 - tf));
    const auto batch = constant_batch(2000, 1, 3);
    CHECK(mode_A_statistic(batch, g, t, ref) == doctest::Approx(expected).epsilon(1e-12));
    const auto c = mode_C_statistic(batch, g, t, ref, 0.1);
    for (Vertex i = 0; i < 2000; ++i) {
      const double want = is_tree_isomorphic(ball(g, i, t), 3) ? 1.0 - all_plus : 1.0;
      REQUIRE(c.per_vertex_tv[i] == doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("mode C matches per-vertex empirical ball laws; mode A is dominated by its mean") {
  const auto g = generate_random_regular(300, 3, 2);
  const auto batch = random_batch(300, 400, 0.7, 3);
  const auto ref = mixture_limit_marginal({3, 1.0, 0.0}, 1);
  const auto c = mode_C_statistic(batch, g, 1, ref, 0.2);
  for (Vertex i = 0; i < 300; ++i) {
    const auto law = empirical_ball_law(batch, g, i, 1);
    if (!law.tree_shaped) {
      CHECK(c.per_vertex_tv[i] == 1.0);
      continue;
    }
    REQUIRE(c.per_vertex_tv[i] == doctest::Approx(tv_distance(law.probabilities, ref.table())).epsilon(1e-12));
  }
  CHECK(mode_A_statistic(batch, g, 1, ref) <= c.mean_tv + 1e-12);
  std::size_t exceed = 0;
  for (double tv : c.per_vertex_tv) exceed += tv > 0.2;
  CHECK(c.exceed_fraction == doctest::Approx(exceed / 300.0));
}

TEST_CASE("ball index follows canonical order on trees") {
  const auto g = generate_random_regular(500, 3, 4);
  const BallIndex idx(g, 2);
  CHECK(idx.tree_fraction() == doctest::Approx(tree_likeness_fraction(g, 2)));
  for (Vertex i = 0; i < 500; ++i) {
    const auto b = ball(g, i, 2);
    const auto members = idx.vertices(i);
    if (idx.tree_shaped(i)) {
      const auto order = tree_order(b, 3);
      REQUIRE(order);
      CHECK(std::equal(members.begin(), members.end(), order->begin(), order->end()));
    } else {
      CHECK(std::equal(members.begin(), members.end(), b.vertices.begin(), b.vertices.end()));
    }
  }
  const std::vector<std::int8_t> spins{1, -1, 1, 1};
  const std::vector<Vertex> order{3, 1, 0};
  CHECK(ball_pattern(spins, order) == 0b101);
}

TEST_CASE("edge agreement") {
  const auto g = complete_graph_k4();
  const auto plus = edge_agreement(constant_batch(4, 1, 10), g);
  CHECK(plus.mean == 1.0);
  CHECK(plus.std_error == 0.0);
  SampleBatch b(BatchMeta{}, 4);
  const std::vector<std::int8_t> x{1, 1, -1, -1};
  b.push_back(x);
  // Two agreeing edges, four disagreeing.
  CHECK(edge_agreement(b, g).mean == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("batch means standard error") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z(0.0, 2.0);
  std::vector<double> xs(40000);
  for (auto& x : xs) x = z(rng);
  const auto e = batch_means(xs);
  CHECK(std::abs(e.mean) < 5 * e.std_error);
  CHECK(e.std_error == doctest::Approx(2.0 / 200.0).epsilon(0.15));
  const std::vector<double> flat(100, 3.0);
  CHECK(batch_means(flat).std_error == 0.0);
  CHECK_THROWS_AS(batch_means(std::vector<double>{}), Error);
}

TEST_CASE("minus-phase indicator and census") {
  const auto g = generate_random_regular(1000, 3, 6);
  const std::vector<std::int8_t> minus(1000, -1);
  const std::vector<std::int8_t> plus(1000, 1);
  CHECK(f_indicator(minus, g, 0, 2, 0.3) == 1);
  CHECK(f_indicator(plus, g, 0, 2, 0.3) == 0);
  CHECK(f_census(minus, g, 2, 0.3) == 1.0);
  CHECK(f_census(plus, g, 2, 0.3) == 0.0);
  CHECK(f_disagreement(minus, g, 2, 0.3) == 0.0);

  // Ball of radius 1 with one plus spin out of four: sum = -2 = -0.5 * 4.
  std::vector<std::int8_t> one = minus;
  one[g.neighbors(0)[0]] = 1;
  CHECK(f_indicator(one, g, 0, 1, 0.5) == 1);
  CHECK(f_indicator(one, g, 0, 1, 0.51) == 0);

  std::vector<std::int8_t> half(1000, 1);
  for (Vertex v = 0; v < 500; ++v) half[v] = -1;
  const double census = f_census(half, g, 0, 0.5);
  CHECK(census == 0.5);
  std::size_t cut = 0;
  for (const auto& e : g.edges()) cut += (e.u < 500) != (e.v < 500);
  CHECK(f_disagreement(half, g, 0, 0.5) == doctest::Approx(static_cast<double>(cut) / 1500.0));
  CHECK(f_census_bound(0.5) == doctest::Approx(0.8));
}

TEST_CASE("q_hat needs a conditioned batch") {
  const auto g = generate_random_regular(100, 3, 1);
  CHECK_THROWS_AS(q_hat(constant_batch(100, 1, 5), g, 1, 0.3), Error);
  CHECK(q_hat(constant_batch(100, 1, 5, true), g, 1, 0.3) == 0.0);
}

TEST_CASE("anticoncentration") {
  const auto g = generate_random_regular(100, 3, 1);
  const auto same = anticoncentration(constant_batch(100, 1, 50), g);
  CHECK(same.degenerate);
  CHECK(same.sup_probability == 1.0);
  CHECK(same.independent_set == greedy_independent_set(g).size());
  CHECK(same.statistic == doctest::Approx(std::sqrt(static_cast<double>(same.independent_set))));
  const auto mixed = anticoncentration(random_batch(100, 2000, 0.5, 9), g);
  CHECK_FALSE(mixed.degenerate);
  // Binomial(100, 1/2) mode mass is about 0.0796.
  CHECK(mixed.sup_probability == doctest::Approx(0.0796).epsilon(0.25));
}

TEST_CASE("variance of local averages") {
  const auto g = generate_random_regular(60, 3, 3);
  const auto batch = random_batch(60, 500, 0.6, 4);
  CHECK(local_average_variance(batch, g, LocalFunction::constant, 0) == doctest::Approx(0.0).epsilon(1e-15));
  std::vector<double> m(batch.size());
  double mean = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) mean += (m[s] = batch.magnetization(s) / 60.0);
  mean /= static_cast<double>(batch.size());
  double var = 0.0;
  for (double x : m) var += (x - mean) * (x - mean);
  var /= static_cast<double>(batch.size() - 1);
  CHECK(local_average_variance(batch, g, LocalFunction::magnetization, 0) == doctest::Approx(var).epsilon(1e-12));
  const LocalFunctionFn spin = [](const RegularGraph&, std::span<const std::int8_t> x, Vertex i) {
    return static_cast<double>(x[i]);
  };
  CHECK(local_average_variance(batch, g, spin) == doctest::Approx(var).epsilon(1e-12));
  CHECK_THROWS_AS(local_average_variance(batch, g, LocalFunction::edge_agreement, 0), Error);
  CHECK(local_average_variance(constant_batch(60, 1, 10), g, LocalFunction::edge_agreement, 1) == 0.0);
  for (auto f : {LocalFunction::constant, LocalFunction::magnetization, LocalFunction::edge_agreement}) {
    CHECK(parse_local_function(to_string(f)) == f);
  }
}
