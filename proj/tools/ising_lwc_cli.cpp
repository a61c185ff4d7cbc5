// ising-lwc: command-line front end for graph generation, tree computations,
// sampling, batch analysis and the named experiments.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ising_lwc/config.hpp"
#include "ising_lwc/diagnostics.hpp"
#include "ising_lwc/error.hpp"
#include "ising_lwc/experiment.hpp"
#include "ising_lwc/graph.hpp"
#include "ising_lwc/report.hpp"
#include "ising_lwc/sampler.hpp"
#include "ising_lwc/tree_gibbs.hpp"

using namespace ising_lwc;
using nlohmann::json;

namespace {

constexpr int exit_failed_assertions = 1;
constexpr int exit_error = 2;

struct GraphOptions {
  std::string file;
  std::string named;
  std::size_t n = 0;
  int k = 3;
  std::uint64_t seed = 1;

  void add(CLI::App* app) {
    app->add_option("--graph", file, "edge-list file");
    app->add_option("--named", named, "built-in graph: K4 or petersen");
    app->add_option("--n", n, "vertices of a random regular graph");
    app->add_option("--k", k, "degree");
    app->add_option("--graph-seed", seed, "seed of the random regular graph");
  }

  RegularGraph build() const {
    if (!file.empty()) return load_edge_list(file);
    if (named == "K4" || named == "k4") return complete_graph_k4();
    if (named == "petersen" || named == "Petersen") return petersen_graph();
    if (!named.empty()) throw Error(ErrorCode::invalid_argument, "unknown named graph '" + named + "'");
    if (n == 0) throw Error(ErrorCode::invalid_argument, "give --graph, --named or --n");
    return generate_random_regular(n, k, seed);
  }
};

template <class F>
void write_to(const std::string& path, F&& emit) {
  if (path.empty() || path == "-") {
    emit(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  emit(out);
}

int cmd_generate(const GraphOptions& go, const std::string& out) {
  const RegularGraph g = go.build();
  write_to(out, [&](std::ostream& os) { write_edge_list(os, g); });
  std::cerr << "n=" << g.num_vertices() << " k=" << g.degree() << " girth=" << girth(g) << " hash=" << g.hash_hex()
            << '\n';
  return 0;
}

int cmd_solve_tree(int k, double beta, std::optional<int> t, int t_plus, const std::string& boundary,
                   const std::string& csv) {
  const IsingParams p{k, beta, 0.0};
  const auto fp = solve_fixed_point(p);
  json j{{"k", k},
         {"beta", beta},
         {"critical_beta", critical_beta(k)},
         {"uniqueness", fp.uniqueness},
         {"h", fp.h},
         {"m", fp.m},
         {"converged", fp.converged},
         {"iterations", fp.iterations},
         {"root_magnetization", root_magnetization(p)},
         {"edge_correlation", edge_correlation(p)},
         {"free_energy", free_energy(p)}};
  if (t) {
    std::optional<TreeMarginal> m;
    if (boundary == "plus") {
      m = t_plus > 0 ? plus_boundary_marginal(p, *t, t_plus) : plus_limit_marginal(p, *t);
    } else if (boundary == "minus") {
      m = minus_boundary_marginal(p, *t, t_plus > 0 ? t_plus : *t + 30);
    } else if (boundary == "free") {
      m = free_boundary_marginal(p, *t, t_plus > 0 ? t_plus : *t + 1);
    } else if (boundary == "mixture") {
      m = t_plus > 0 ? mixture_marginal(p, *t, t_plus) : mixture_limit_marginal(p, *t);
    } else {
      throw Error(ErrorCode::invalid_argument, "unknown boundary '" + boundary + "'");
    }
    j["marginal"] = {{"t", *t}, {"boundary", boundary}, {"root_mean", m->root_mean()}};
    if (*t >= 1) j["marginal"]["root_edge_moment"] = m->edge_moment(0);
    if (!csv.empty()) write_to(csv, [&](std::ostream& os) { m->write_csv(os); });
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_sample(const GraphOptions& go, double beta, double field, const std::string& algorithm, std::size_t samples,
               std::optional<std::size_t> burn_in, std::size_t thin, std::uint64_t seed, bool conditioned,
               const std::string& out) {
  const RegularGraph g = go.build();
  const IsingParams p{g.degree(), beta, field};
  const Algorithm algo = algorithm == "auto" ? default_algorithm(p) : parse_algorithm(algorithm);
  SamplerSettings s = default_settings(algo, seed);
  if (burn_in) s.burn_in = *burn_in;
  s.thin = thin;
  SampleBatch batch = sample_unconditioned(g, p, samples, s);
  if (conditioned) batch = sample_conditioned_plus(std::move(batch));
  write_to(out, [&](std::ostream& os) { write_batch_csv(os, batch); });
  return 0;
}

int cmd_analyze(const GraphOptions& go, const std::string& batch_path, std::vector<int> ts, int ell,
                std::optional<double> delta, double epsilon, const std::string& reference, const std::string& out) {
  const RegularGraph g = go.build();
  std::ifstream in(batch_path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + batch_path);
  const SampleBatch batch = read_batch_csv(in);
  if (batch.meta().graph_hash != g.hash_hex()) {
    std::cerr << "warning: batch was drawn on graph " << batch.meta().graph_hash << ", analyzing on " << g.hash_hex()
              << '\n';
  }
  const IsingParams p{g.degree(), batch.meta().beta, 0.0};
  const bool plus = reference == "plus";
  if (!plus && reference != "mixture") throw Error(ErrorCode::invalid_argument, "reference must be plus or mixture");

  ExperimentResult result;
  result.experiment = "analyze";
  for (int t : ts) {
    ConvergenceReport r;
    r.label = "t=" + std::to_string(t);
    r.n = g.num_vertices();
    r.beta = p.beta;
    r.samples = batch.size();
    r.algorithm = to_string(batch.meta().algorithm);
    r.seed = batch.meta().seed;
    r.graph_hash = g.hash_hex();
    const BallIndex balls(g, t);
    const TreeMarginal ref = plus ? plus_limit_marginal(p, t, Representation::table)
                                  : mixture_limit_marginal(p, t, Representation::table);
    r.t = t;
    r.tree_likeness = balls.tree_fraction();
    r.mode_A_tv = mode_A_statistic(batch, balls, ref);
    auto c = mode_C_statistic(batch, balls, ref, epsilon);
    r.mode_C_epsilon = epsilon;
    r.mode_C_exceed_fraction = c.exceed_fraction;
    r.mode_C_mean_tv = c.mean_tv;
    r.mode_C_tv_per_vertex = std::move(c.per_vertex_tv);
    r.edge_agreement = edge_agreement(batch, g);
    r.edge_correlation_tree = edge_correlation(p);
    const auto a = anticoncentration(batch, g);
    r.anticoncentration_sup = a.sup_probability;
    r.anticoncentration_statistic = a.statistic;
    const double d = delta ? *delta : root_magnetization(p) / 2.0;
    if (d > 0.0) {
      const BallIndex census_balls(g, ell);
      double census = 0.0;
      double disagreement = 0.0;
      for (std::size_t s = 0; s < batch.size(); ++s) {
        census += f_census(batch.spins(s), census_balls, d);
        disagreement += f_disagreement(batch.spins(s), g, census_balls, d);
      }
      r.ell = ell;
      r.delta = d;
      r.f_census_mean = census / static_cast<double>(batch.size());
      r.f_disagreement_mean = disagreement / static_cast<double>(batch.size());
      if (batch.meta().conditioned) r.q_hat = r.f_census_mean;
    }
    result.points.push_back(std::move(r));
  }
  write_to(out, [&](std::ostream& os) { write_report_json(os, result); });
  return 0;
}

int finish(const ExperimentConfig& cfg, const ExperimentResult& result) {
  write_outputs(cfg, result);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& a : result.assertions) {
    std::cout << (a.passed ? "PASS " : "FAIL ") << a.name << "  [" << a.detail << "]\n";
  }
  std::cout << "outputs written to " << cfg.output_dir << '\n';
  return result.all_passed() ? 0 : exit_failed_assertions;
}

ExperimentConfig assemble_config(const std::string& name, const std::string& path, const std::vector<std::string>& sets,
                                 const std::string& output) {
  ExperimentConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::config_error, "cannot open config '" + path + "'");
    std::stringstream text;
    text << in.rdbuf();
    std::string body = text.str();
    // Overrides are appended so they win; the result is validated once.
    for (const auto& s : sets) body += "\n" + s;
    if (!name.empty()) body += "\nexperiment = " + name;
    if (!output.empty()) body += "\noutput = " + output;
    std::istringstream merged(body);
    return parse_config(merged);
  }
  cfg.experiment = name;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::config_error, "--set expects key=value, got '" + s + "'");
    auto trim = [](std::string x) {
      x.erase(0, x.find_first_not_of(" \t"));
      x.erase(x.find_last_not_of(" \t") + 1);
      return x;
    };
    apply_setting(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  if (!output.empty()) cfg.output_dir = output;
  validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ising measures on locally tree-like regular graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version()));

  GraphOptions gen_graph;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate-graph", "write a regular graph as an edge list");
  gen_graph.add(gen);
  gen->add_option("--out,-o", gen_out, "output file (default stdout)");

  int tree_k = 3;
  double tree_beta = 1.0;
  std::optional<int> tree_t;
  int tree_t_plus = 0;
  std::string tree_boundary = "plus";
  std::string tree_csv;
  auto* tree = app.add_subcommand("solve-tree", "fixed point and closed-form observables on T_k");
  tree->add_option("--k", tree_k, "degree")->check(CLI::Range(3, 64));
  tree->add_option("--beta", tree_beta, "inverse temperature")->required();
  tree->add_option("--t", tree_t, "depth of a marginal to compute");
  tree->add_option("--t-plus", tree_t_plus, "boundary depth (0: the limit)");
  tree->add_option("--boundary", tree_boundary, "plus | minus | free | mixture");
  tree->add_option("--csv", tree_csv, "write the marginal table as CSV");

  GraphOptions smp_graph;
  double smp_beta = 1.0;
  double smp_field = 0.0;
  std::string smp_algo = "auto";
  std::size_t smp_samples = 1000;
  std::optional<std::size_t> smp_burn;
  std::size_t smp_thin = 10;
  std::uint64_t smp_seed = 1;
  bool smp_cond = false;
  std::string smp_out;
  auto* smp = app.add_subcommand("sample", "draw a seeded batch and write it as CSV");
  smp_graph.add(smp);
  smp->add_option("--beta", smp_beta, "inverse temperature");
  smp->add_option("--field", smp_field, "external field B");
  smp->add_option("--algorithm", smp_algo, "auto | glauber | wolff | exact");
  smp->add_option("--samples", smp_samples, "number of samples");
  smp->add_option("--burn-in", smp_burn, "burn-in steps (default per algorithm)");
  smp->add_option("--thin", smp_thin, "steps between samples");
  smp->add_option("--seed", smp_seed, "sampler seed");
  smp->add_flag("--conditioned", smp_cond, "condition on M > 0 by flipping");
  smp->add_option("--out,-o", smp_out, "output file (default stdout)");

  GraphOptions ana_graph;
  std::string ana_batch;
  std::vector<int> ana_t{1, 2};
  int ana_ell = 2;
  std::optional<double> ana_delta;
  double ana_eps = 0.1;
  std::string ana_ref = "mixture";
  std::string ana_out;
  auto* ana = app.add_subcommand("analyze", "convergence statistics of a batch");
  ana_graph.add(ana);
  ana->add_option("--batch", ana_batch, "batch CSV")->required();
  ana->add_option("--t", ana_t, "ball radii");
  ana->add_option("--ell", ana_ell, "census radius");
  ana->add_option("--delta", ana_delta, "census threshold (default rho/2)");
  ana->add_option("--epsilon", ana_eps, "per-vertex TV threshold");
  ana->add_option("--reference", ana_ref, "mixture | plus");
  ana->add_option("--out,-o", ana_out, "report JSON (default stdout)");

  std::string exp_name;
  std::string exp_config;
  std::vector<std::string> exp_sets;
  std::string exp_output;
  auto* exp = app.add_subcommand("experiment", "run a named experiment");
  exp->add_option("name", exp_name, "experiment name")->required()->check(CLI::IsMember(experiment_names()));
  exp->add_option("--config,-c", exp_config, "config file");
  exp->add_option("--set", exp_sets, "override key=value (repeatable)");
  exp->add_option("--output", exp_output, "output directory");

  std::string val_config;
  std::vector<std::string> val_sets;
  std::string val_output;
  auto* val = app.add_subcommand("validate", "exact-oracle checks of the samplers on K4 and Petersen");
  val->add_option("--config,-c", val_config, "config file");
  val->add_option("--set", val_sets, "override key=value (repeatable)");
  val->add_option("--output", val_output, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_generate(gen_graph, gen_out);
    if (*tree) return cmd_solve_tree(tree_k, tree_beta, tree_t, tree_t_plus, tree_boundary, tree_csv);
    if (*smp) {
      return cmd_sample(smp_graph, smp_beta, smp_field, smp_algo, smp_samples, smp_burn, smp_thin, smp_seed, smp_cond,
                        smp_out);
    }
    if (*ana) return cmd_analyze(ana_graph, ana_batch, ana_t, ana_ell, ana_delta, ana_eps, ana_ref, ana_out);
    if (*exp) {
      const auto cfg = assemble_config(exp_name, exp_config, exp_sets, exp_output);
      return finish(cfg, run_experiment(cfg));
    }
    if (*val) {
      std::vector<std::string> sets{"sampler.samples=1000000"};
      sets.insert(sets.end(), val_sets.begin(), val_sets.end());
      const auto cfg = assemble_config("validate", val_config, val_config.empty() ? sets : val_sets,
                                       val_output.empty() ? std::string("out/validate") : val_output);
      return finish(cfg, run_experiment(cfg));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}
