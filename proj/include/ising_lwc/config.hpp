#pragma once

// Experiment configuration: a "key = value" text format, one entry per line,
// '#' starts a comment. Lists are comma-separated. See README for the keys.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ising_lwc/diagnostics.hpp"
#include "ising_lwc/graph.hpp"
#include "ising_lwc/sampler.hpp"
#include "ising_lwc/tree_gibbs.hpp"

namespace ising_lwc {

enum class GraphKind { random, named, file, disjoint };

struct GraphSpec {
  GraphKind kind = GraphKind::random;
  std::string name;                   ///< named: "K4" or "petersen"
  std::string path;                   ///< file
  std::vector<std::size_t> n_ladder;  ///< random
  std::vector<std::size_t> r_ladder;  ///< disjoint: number of components
  std::size_t n_per = 500;            ///< disjoint: vertices per component
  int k = 3;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string experiment;
  GraphSpec graph;
  double beta = 1.0;
  std::vector<double> beta_grid;  ///< energy-check and validate
  double field = 0.0;

  std::optional<Algorithm> algorithm;  ///< unset: default_algorithm per point
  std::size_t samples = 1000;
  std::optional<std::size_t> burn_in;  ///< unset: algorithm default
  std::size_t thin = 10;
  std::uint64_t seed = 1;
  bool global_flip = true;
  Start start = Start::all_plus;

  std::vector<int> t_values{1, 2};
  int ell = 2;
  std::optional<double> delta;  ///< unset: rho/2
  double epsilon = 0.1;
  std::vector<LocalFunction> local_functions{LocalFunction::magnetization, LocalFunction::edge_agreement};

  std::string output_dir = "out";
  std::size_t threads = 0;  ///< 0: hardware concurrency

  std::optional<double> assert_mode_A_max;
  std::optional<double> assert_q_hat_max;
  double assert_q_hat_min = 0.2;
  double assert_q_hat_upper = 0.5;
  double assert_z_max = 2.0;
  double assert_identity_tol = 1e-6;
  double assert_growth_tol = 0.2;
  double assert_tv_max = 0.01;

  IsingParams params_at(double b) const { return {graph.k, b, field}; }
  IsingParams params() const { return params_at(beta); }
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"theorem1-part1", "theorem1-part2", "counterexample", "energy-check",
                                              "concentration", "anticoncentration", "validate"};
  return names;
}

/// Parses and validates; every failure is a config-error.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
/// Applies one "key=value" override (CLI --set) to a parsed config.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
void validate(const ExperimentConfig& cfg);

/// Canonical text form; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& cfg);

}  // namespace ising_lwc
