#include "ising_lwc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "ising_lwc/error.hpp"
#include "ising_lwc/kernels.hpp"

#ifndef ISING_LWC_VERSION
#define ISING_LWC_VERSION "0.0.0"
#endif

namespace ising_lwc {

const char* library_version() noexcept { return ISING_LWC_VERSION; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ stream) ^ index);
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  if (count == 0) return;
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  std::vector<std::exception_ptr> errors(count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

RegularGraph build_graph(const GraphSpec& spec, std::size_t index) {
  switch (spec.kind) {
    case GraphKind::named:
      return spec.name == "K4" ? complete_graph_k4() : petersen_graph();
    case GraphKind::file:
      return load_edge_list(spec.path);
    case GraphKind::random:
      return generate_random_regular(spec.n_ladder.at(index), spec.k, derive_seed(spec.seed, 0, index));
    case GraphKind::disjoint: {
      std::vector<RegularGraph> parts;
      const std::size_t r = spec.r_ladder.at(index);
      for (std::size_t c = 0; c < r; ++c) {
        parts.push_back(generate_random_regular(spec.n_per, spec.k, derive_seed(spec.seed, 100 + index, c)));
      }
      return disjoint_union(parts);
    }
  }
  throw Error(ErrorCode::config_error, "unknown graph kind");
}

SamplerSettings point_settings(const ExperimentConfig& cfg, const IsingParams& p, std::uint64_t seed) {
  SamplerSettings s = default_settings(cfg.algorithm.value_or(default_algorithm(p)), seed);
  if (cfg.burn_in) s.burn_in = *cfg.burn_in;
  s.thin = cfg.thin;
  s.start = cfg.start;
  s.random_global_flip = cfg.global_flip;
  return s;
}

double resolve_delta(const ExperimentConfig& cfg, const IsingParams& p) {
  if (cfg.delta) return *cfg.delta;
  const double rho = root_magnetization(p);
  if (rho <= 0.0) {
    throw Error(ErrorCode::config_error, "delta = rho/2 is undefined in the uniqueness regime; set diagnostics.delta");
  }
  return rho / 2.0;
}

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::size_t ladder_size(const GraphSpec& g) {
  switch (g.kind) {
    case GraphKind::random: return g.n_ladder.size();
    case GraphKind::disjoint: return g.r_ladder.size();
    default: return 1;
  }
}

ConvergenceReport base_point(const RegularGraph& g, const IsingParams& p, const SampleBatch& batch,
                             const SamplerSettings& s, const std::string& label) {
  ConvergenceReport r;
  r.label = label;
  r.n = g.num_vertices();
  r.beta = p.beta;
  r.samples = batch.size();
  r.algorithm = to_string(s.algorithm);
  r.seed = s.seed;
  r.graph_hash = g.hash_hex();
  return r;
}

void add_mode_statistics(ConvergenceReport& r, const SampleBatch& batch, const BallIndex& balls,
                         const TreeMarginal& ref, double epsilon) {
  r.t = balls.radius();
  r.tree_likeness = balls.tree_fraction();
  r.mode_A_tv = mode_A_statistic(batch, balls, ref);
  auto c = mode_C_statistic(batch, balls, ref, epsilon);
  r.mode_C_epsilon = epsilon;
  r.mode_C_exceed_fraction = c.exceed_fraction;
  r.mode_C_mean_tv = c.mean_tv;
  r.mode_C_tv_per_vertex = std::move(c.per_vertex_tv);
}

// Passes iff xs is strictly decreasing.
Assertion decreasing(const std::string& name, const std::vector<double>& xs, const std::vector<std::size_t>& ns) {
  Assertion a{name, true, ""};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    a.detail += (i ? ", " : "") + std::string("n=") + std::to_string(ns[i]) + ": " + fmt(xs[i]);
    if (i > 0 && !(xs[i] < xs[i - 1])) a.passed = false;
  }
  return a;
}

struct Theorem1Point {
  std::vector<ConvergenceReport> reports;
  std::vector<std::string> warnings;
};

ExperimentResult run_theorem1(const ExperimentConfig& cfg, bool conditioned) {
  validate(cfg);
  const IsingParams p = cfg.params();
  const std::size_t points = ladder_size(cfg.graph);
  std::vector<Theorem1Point> out(points);
  std::optional<double> delta;
  if (conditioned) delta = resolve_delta(cfg, p);
  // Tree references are shared by every ladder point.
  std::vector<TreeMarginal> refs;
  for (int t : cfg.t_values) {
    refs.push_back(conditioned ? plus_limit_marginal(p, t, Representation::table)
                               : mixture_limit_marginal(p, t, Representation::table));
  }
  parallel_for(points, cfg.threads, [&](std::size_t i) {
    const RegularGraph g = build_graph(cfg.graph, i);
    const auto settings = point_settings(cfg, p, derive_seed(cfg.seed, 1, i));
    SampleBatch batch = sample_unconditioned(g, p, cfg.samples, settings);
    if (conditioned) batch = sample_conditioned_plus(std::move(batch));
    std::optional<BallIndex> census_balls;
    double census = 0.0;
    double disagreement = 0.0;
    std::size_t violations = 0;
    if (conditioned) {
      census_balls.emplace(g, cfg.ell);
      for (std::size_t s = 0; s < batch.size(); ++s) {
        const double c = f_census(batch.spins(s), *census_balls, *delta);
        census += c;
        violations += c > f_census_bound(*delta);
        disagreement += f_disagreement(batch.spins(s), g, *census_balls, *delta);
      }
      census /= static_cast<double>(batch.size());
      disagreement /= static_cast<double>(batch.size());
      if (violations > 0 && census_balls->tree_fraction() >= 0.99) {
        out[i].warnings.push_back("n=" + std::to_string(g.num_vertices()) + ": census exceeded 1/(1+delta/2) in " +
                                  std::to_string(violations) + " of " + std::to_string(batch.size()) + " samples");
      }
    }
    for (std::size_t ti = 0; ti < cfg.t_values.size(); ++ti) {
      const int t = cfg.t_values[ti];
      auto r = base_point(g, p, batch, settings, "n=" + std::to_string(g.num_vertices()) + ",t=" + std::to_string(t));
      add_mode_statistics(r, batch, BallIndex(g, t), refs[ti], cfg.epsilon);
      if (conditioned) {
        r.ell = cfg.ell;
        r.delta = delta;
        r.q_hat = census;
        r.f_census_mean = census;
        r.f_disagreement_mean = disagreement;
      }
      out[i].reports.push_back(std::move(r));
    }
  });

  ExperimentResult result;
  result.experiment = conditioned ? "theorem1-part2" : "theorem1-part1";
  for (auto& pt : out) {
    for (auto& r : pt.reports) result.points.push_back(std::move(r));
    for (auto& w : pt.warnings) result.warnings.push_back(std::move(w));
  }
  const std::string target = conditioned ? "plus" : "mixture";
  for (std::size_t ti = 0; ti < cfg.t_values.size(); ++ti) {
    std::vector<double> tvs;
    std::vector<std::size_t> ns;
    for (std::size_t i = 0; i < points; ++i) {
      tvs.push_back(*result.points[i * cfg.t_values.size() + ti].mode_A_tv);
      ns.push_back(result.points[i * cfg.t_values.size() + ti].n);
    }
    result.assertions.push_back(
        decreasing("mode_A TV vs " + target + " decreasing in n (t=" + std::to_string(cfg.t_values[ti]) + ")", tvs, ns));
    if (cfg.assert_mode_A_max && cfg.t_values[ti] == 1 && !tvs.empty()) {
      result.assertions.push_back({"mode_A TV (t=1, largest n) < " + fmt(*cfg.assert_mode_A_max),
                                   tvs.back() < *cfg.assert_mode_A_max, fmt(tvs.back())});
    }
  }
  if (conditioned && cfg.assert_q_hat_max && points > 0) {
    const double q = *result.points[(points - 1) * cfg.t_values.size()].q_hat;
    result.assertions.push_back({"q_hat (largest n) < " + fmt(*cfg.assert_q_hat_max), q < *cfg.assert_q_hat_max, fmt(q)});
  }
  return result;
}

}  // namespace

ExperimentResult run_theorem1_part1(const ExperimentConfig& cfg) { return run_theorem1(cfg, false); }
ExperimentResult run_theorem1_part2(const ExperimentConfig& cfg) { return run_theorem1(cfg, true); }

ExperimentResult run_counterexample(const ExperimentConfig& cfg) {
  validate(cfg);
  const IsingParams p = cfg.params();
  const double delta = resolve_delta(cfg, p);
  const std::size_t points = ladder_size(cfg.graph);
  std::vector<ConvergenceReport> reports(points);
  parallel_for(points, cfg.threads, [&](std::size_t i) {
    const RegularGraph g = build_graph(cfg.graph, i);
    const auto settings = point_settings(cfg, p, derive_seed(cfg.seed, 1, i));
    const SampleBatch batch = sample_conditioned_plus(sample_unconditioned(g, p, cfg.samples, settings));
    const BallIndex balls(g, cfg.ell);
    auto& r = reports[i] = base_point(g, p, batch, settings, "r=" + std::to_string(cfg.graph.r_ladder[i]));
    r.ell = cfg.ell;
    r.delta = delta;
    r.tree_likeness = balls.tree_fraction();
    r.q_hat = q_hat(batch, balls, delta);
    r.f_census_mean = r.q_hat;
    r.extra["components"] = static_cast<double>(cfg.graph.r_ladder[i]);
  });
  ExperimentResult result;
  result.experiment = "counterexample";
  for (auto& r : reports) {
    const double q = *r.q_hat;
    result.assertions.push_back({"q_hat in [" + fmt(cfg.assert_q_hat_min) + ", " + fmt(cfg.assert_q_hat_upper) + ") at " + r.label,
                                 q >= cfg.assert_q_hat_min && q < cfg.assert_q_hat_upper, fmt(q)});
    result.points.push_back(std::move(r));
  }
  return result;
}

ExperimentResult run_energy_check(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::size_t graphs = ladder_size(cfg.graph);
  const std::size_t betas = cfg.beta_grid.size();
  std::vector<ConvergenceReport> reports(graphs * betas);
  std::vector<std::optional<RegularGraph>> graph_cache(graphs);
  std::mutex cache_mutex;
  auto graph_at = [&](std::size_t gi) -> const RegularGraph& {
    std::lock_guard lock(cache_mutex);
    if (!graph_cache[gi]) graph_cache[gi] = build_graph(cfg.graph, gi);
    return *graph_cache[gi];
  };
  parallel_for(graphs * betas, cfg.threads, [&](std::size_t job) {
    const std::size_t gi = job / betas;
    const std::size_t bi = job % betas;
    const RegularGraph& g = graph_at(gi);
    const IsingParams p = cfg.params_at(cfg.beta_grid[bi]);
    const auto settings = point_settings(cfg, p, derive_seed(cfg.seed, 1, job));
    const SampleBatch batch = sample_unconditioned(g, p, cfg.samples, settings);
    const SampleBatch cond = sample_conditioned_plus(batch);
    auto& r = reports[job] = base_point(g, p, batch, settings, "n=" + std::to_string(g.num_vertices()) + ",beta=" + fmt(p.beta));
    r.edge_agreement = edge_agreement(batch, g);
    r.edge_agreement_conditioned = edge_agreement(cond, g);
    r.edge_correlation_tree = edge_correlation(p);
  });

  ExperimentResult result;
  result.experiment = "energy-check";
  for (auto& r : reports) {
    const double ec = *r.edge_correlation_tree;
    const auto& u = *r.edge_agreement;
    const auto& c = *r.edge_agreement_conditioned;
    const double z = cfg.assert_z_max;
    result.assertions.push_back({"edge agreement within " + fmt(z) + " stderr of tree value (mu_n) at " + r.label,
                                 std::abs(u.mean - ec) <= z * u.std_error,
                                 "estimate " + fmt(u.mean) + " +- " + fmt(u.std_error) + ", tree " + fmt(ec)});
    result.assertions.push_back({"edge agreement within " + fmt(z) + " stderr of tree value (mu_n,+) at " + r.label,
                                 std::abs(c.mean - ec) <= z * c.std_error,
                                 "estimate " + fmt(c.mean) + " +- " + fmt(c.std_error) + ", tree " + fmt(ec)});
    const double combined = std::hypot(u.std_error, c.std_error);
    result.assertions.push_back({"mu_n and mu_n,+ edge agreement agree within stderr at " + r.label,
                                 std::abs(u.mean - c.mean) <= combined,
                                 "difference " + fmt(u.mean - c.mean) + ", stderr " + fmt(combined)});
  }
  // Thermodynamic identity on the grid, away from the critical window.
  constexpr double eps = 1e-4;
  for (double b : cfg.beta_grid) {
    const IsingParams p = cfg.params_at(b);
    if (std::abs(b - critical_beta(p.k)) <= 0.02 || b < eps) continue;
    const double fd = (free_energy(cfg.params_at(b + eps)) - free_energy(cfg.params_at(b - eps))) / (2 * eps);
    const double target = 0.5 * p.k * edge_correlation(p);
    result.assertions.push_back({"d phi / d beta = (k/2) edge correlation at beta=" + fmt(b),
                                 std::abs(fd - target) <= cfg.assert_identity_tol,
                                 "finite difference " + fmt(fd) + ", (k/2)*corr " + fmt(target)});
  }
  for (auto& r : reports) result.points.push_back(std::move(r));
  return result;
}

ExperimentResult run_concentration(const ExperimentConfig& cfg) {
  validate(cfg);
  const IsingParams p = cfg.params();
  const std::size_t points = ladder_size(cfg.graph);
  std::vector<ConvergenceReport> reports(points);
  parallel_for(points, cfg.threads, [&](std::size_t i) {
    const RegularGraph g = build_graph(cfg.graph, i);
    const auto settings = point_settings(cfg, p, derive_seed(cfg.seed, 1, i));
    const SampleBatch batch = sample_conditioned_plus(sample_unconditioned(g, p, cfg.samples, settings));
    auto& r = reports[i] = base_point(g, p, batch, settings, "n=" + std::to_string(g.num_vertices()));
    r.ell = cfg.ell;
    for (auto f : cfg.local_functions) {
      r.extra[std::string("variance_") + to_string(f)] =
          local_average_variance(batch, g, f, std::max(cfg.ell, support_radius(f)));
    }
  });
  ExperimentResult result;
  result.experiment = "concentration";
  std::vector<std::size_t> ns;
  for (const auto& r : reports) ns.push_back(r.n);
  for (auto f : cfg.local_functions) {
    if (f == LocalFunction::constant) continue;
    const std::string key = std::string("variance_") + to_string(f);
    std::vector<double> v;
    for (const auto& r : reports) v.push_back(r.extra.at(key));
    result.assertions.push_back(decreasing(std::string("variance of the ") + to_string(f) + " average decreasing in n", v, ns));
  }
  result.points = std::move(reports);
  return result;
}

ExperimentResult run_anticoncentration(const ExperimentConfig& cfg) {
  validate(cfg);
  const IsingParams p = cfg.params();
  const std::size_t points = ladder_size(cfg.graph);
  std::vector<ConvergenceReport> reports(points);
  std::vector<std::string> degenerate(points);
  parallel_for(points, cfg.threads, [&](std::size_t i) {
    const RegularGraph g = build_graph(cfg.graph, i);
    const auto settings = point_settings(cfg, p, derive_seed(cfg.seed, 1, i));
    const SampleBatch batch = sample_unconditioned(g, p, cfg.samples, settings);
    const auto a = anticoncentration(batch, g);
    auto& r = reports[i] = base_point(g, p, batch, settings, "n=" + std::to_string(g.num_vertices()));
    r.anticoncentration_sup = a.sup_probability;
    r.anticoncentration_statistic = a.statistic;
    r.extra["independent_set"] = static_cast<double>(a.independent_set);
    if (a.degenerate) degenerate[i] = r.label + ": only one magnetization value observed";
  });
  ExperimentResult result;
  result.experiment = "anticoncentration";
  for (auto& w : degenerate) {
    if (!w.empty()) result.warnings.push_back(w);
  }
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const double prev = *reports[i - 1].anticoncentration_statistic;
    const double cur = *reports[i].anticoncentration_statistic;
    result.assertions.push_back({"anticoncentration non-increasing within " + fmt(100 * cfg.assert_growth_tol) + "% from " +
                                     reports[i - 1].label + " to " + reports[i].label,
                                 cur <= (1.0 + cfg.assert_growth_tol) * prev, fmt(prev) + " -> " + fmt(cur)});
  }
  result.points = std::move(reports);
  return result;
}

ExperimentResult validate_samplers(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::vector<double> betas = cfg.beta_grid.empty() ? std::vector<double>{0.3, 0.7, 1.2} : cfg.beta_grid;
  const RegularGraph graphs[2] = {complete_graph_k4(), petersen_graph()};
  const char* names[2] = {"K4", "petersen"};
  const Algorithm algos[2] = {Algorithm::glauber, Algorithm::wolff};
  const std::size_t jobs = 2 * betas.size() * 2;
  std::vector<ConvergenceReport> reports(jobs);
  std::vector<std::vector<double>> laws(jobs);
  // Extra jobs: conditioned checks on the Petersen graph at cfg.beta.
  ConvergenceReport cond_wolff;
  ConvergenceReport cond_exact;
  bool push_forward_exact = false;
  parallel_for(jobs + 1, cfg.threads, [&](std::size_t job) {
    if (job == jobs) {
      const RegularGraph& g = graphs[1];
      const IsingParams p{3, cfg.beta, 0.0};
      const auto dist = exact_distribution(g, p);
      const auto target = conditional_plus_law(dist);
      push_forward_exact = flip_push_forward(dist) == target;
      SamplerSettings sw = point_settings(cfg, p, derive_seed(cfg.seed, 3, 0));
      sw.algorithm = Algorithm::wolff;
      if (!cfg.burn_in) sw.burn_in = default_settings(Algorithm::wolff, 0).burn_in;
      const auto wb = sample_conditioned_plus(sample_unconditioned(g, p, cfg.samples, sw));
      cond_wolff = base_point(g, p, wb, sw, "petersen/wolff/conditioned/beta=" + fmt(p.beta));
      cond_wolff.extra["tv"] = tv_distance(empirical_distribution(wb), target);
      SamplerSettings se = sw;
      se.algorithm = Algorithm::exact;
      se.seed = derive_seed(cfg.seed, 3, 1);
      const auto eb = sample_conditioned_plus(sample_unconditioned(g, p, cfg.samples, se));
      cond_exact = base_point(g, p, eb, se, "petersen/exact/conditioned/beta=" + fmt(p.beta));
      cond_exact.extra["tv"] = tv_distance(empirical_distribution(eb), target);
      return;
    }
    const std::size_t gi = job / (betas.size() * 2);
    const std::size_t bi = (job / 2) % betas.size();
    const Algorithm algo = algos[job % 2];
    const RegularGraph& g = graphs[gi];
    const IsingParams p{3, betas[bi], cfg.field};
    SamplerSettings s = point_settings(cfg, p, derive_seed(cfg.seed, 2, job));
    s.algorithm = algo;
    if (!cfg.burn_in) s.burn_in = default_settings(algo, 0).burn_in;
    const auto batch = sample_unconditioned(g, p, cfg.samples, s);
    laws[job] = empirical_distribution(batch);
    auto& r = reports[job] =
        base_point(g, p, batch, s, std::string(names[gi]) + "/" + to_string(algo) + "/beta=" + fmt(p.beta));
    r.extra["tv"] = tv_distance(laws[job], exact_distribution(g, p).probabilities);
  });

  ExperimentResult result;
  result.experiment = "validate";
  for (const auto& r : reports) {
    const double tv = r.extra.at("tv");
    result.assertions.push_back({"TV vs exact < " + fmt(cfg.assert_tv_max) + " for " + r.label, tv < cfg.assert_tv_max, fmt(tv)});
  }
  for (std::size_t bi = 0; bi < betas.size(); ++bi) {
    const std::size_t base = (betas.size() + bi) * 2;  // Petersen rows
    const double tv = tv_distance(laws[base], laws[base + 1]);
    result.assertions.push_back({"Glauber vs Wolff TV < 0.015 on petersen at beta=" + fmt(betas[bi]), tv < 0.015, fmt(tv)});
  }
  for (const auto* r : {&cond_wolff, &cond_exact}) {
    const double tv = r->extra.at("tv");
    result.assertions.push_back({"conditioned TV vs exact {M>0} law < " + fmt(cfg.assert_tv_max) + " for " + r->label,
                                 tv < cfg.assert_tv_max, fmt(tv)});
  }
  result.assertions.push_back({"flip push-forward of the exact law equals the conditional law exactly", push_forward_exact,
                               push_forward_exact ? "bitwise equal" : "tables differ"});
  result.points = std::move(reports);
  result.points.push_back(std::move(cond_wolff));
  result.points.push_back(std::move(cond_exact));
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto& e = cfg.experiment;
  if (e == "theorem1-part1") return run_theorem1_part1(cfg);
  if (e == "theorem1-part2") return run_theorem1_part2(cfg);
  if (e == "counterexample") return run_counterexample(cfg);
  if (e == "energy-check") return run_energy_check(cfg);
  if (e == "concentration") return run_concentration(cfg);
  if (e == "anticoncentration") return run_anticoncentration(cfg);
  if (e == "validate") return validate_samplers(cfg);
  throw Error(ErrorCode::config_error, "unknown experiment '" + e + "'");
}

void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorCode::io_error, "cannot create " + cfg.output_dir + ": " + ec.message());
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(cfg.output_dir) / name);
    if (!out) throw Error(ErrorCode::io_error, std::string("cannot write ") + name);
    return out;
  };
  {
    auto out = open("report.json");
    write_report_json(out, result);
  }
  {
    auto out = open("report.csv");
    write_report_csv(out, result);
  }
  nlohmann::json m;
  m["experiment"] = result.experiment;
  m["version"] = library_version();
  m["kernels_isa"] = kernels::to_string(kernels::active_isa());
  m["config"] = to_text(cfg);
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& p : result.points) {
    seeds.push_back({{"label", p.label}, {"sampler_seed", p.seed}, {"graph_hash", p.graph_hash}});
  }
  m["points"] = seeds;
  m["all_passed"] = result.all_passed();
  auto out = open("manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace ising_lwc
