#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ising_lwc/diagnostics.hpp"

namespace ising_lwc {

/// Statistics of one ladder point (one graph, one parameter set, one t).
/// Unset optionals are emitted as null.
struct ConvergenceReport {
  std::string label;
  std::size_t n = 0;
  double beta = 0.0;
  std::optional<int> t;
  std::optional<int> ell;
  std::optional<double> delta;
  std::size_t samples = 0;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string graph_hash;

  std::optional<double> tree_likeness;
  std::optional<double> mode_A_tv;
  std::vector<double> mode_C_tv_per_vertex;
  std::optional<double> mode_C_epsilon;
  std::optional<double> mode_C_exceed_fraction;
  std::optional<double> mode_C_mean_tv;
  std::optional<Estimate> edge_agreement;
  std::optional<Estimate> edge_agreement_conditioned;
  std::optional<double> edge_correlation_tree;
  std::optional<double> f_census_mean;
  std::optional<double> f_disagreement_mean;
  std::optional<double> q_hat;
  std::optional<double> anticoncentration_sup;
  std::optional<double> anticoncentration_statistic;
  /// Named scalars specific to an experiment (variances per family, ...).
  std::map<std::string, double> extra;
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<ConvergenceReport> points;
  std::vector<Assertion> assertions;
  std::vector<std::string> warnings;

  bool all_passed() const noexcept;
};

/// Bin counts of per-vertex TVs over [0, 1] in `bins` equal bins.
std::vector<std::size_t> tv_histogram(const std::vector<double>& tvs, std::size_t bins);

void write_report_json(std::ostream& out, const ExperimentResult& result);
/// One row per ladder point; columns for every scalar field.
void write_report_csv(std::ostream& out, const ExperimentResult& result);

}  // namespace ising_lwc
