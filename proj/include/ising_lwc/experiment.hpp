#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ising_lwc/config.hpp"
#include "ising_lwc/report.hpp"

namespace ising_lwc {

const char* library_version() noexcept;

/// splitmix64 of (base, stream, index): independent seeds per ladder point.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

/// Graph for ladder point `index` (ignored by named and file graphs).
RegularGraph build_graph(const GraphSpec& spec, std::size_t index);

/// Sampler settings for a point, after algorithm and burn-in defaults.
SamplerSettings point_settings(const ExperimentConfig& cfg, const IsingParams& p, std::uint64_t seed);

/// delta if configured, else rho(beta)/2.
double resolve_delta(const ExperimentConfig& cfg, const IsingParams& p);

ExperimentResult run_theorem1_part1(const ExperimentConfig& cfg);
ExperimentResult run_theorem1_part2(const ExperimentConfig& cfg);
ExperimentResult run_counterexample(const ExperimentConfig& cfg);
ExperimentResult run_energy_check(const ExperimentConfig& cfg);
ExperimentResult run_concentration(const ExperimentConfig& cfg);
ExperimentResult run_anticoncentration(const ExperimentConfig& cfg);
ExperimentResult validate_samplers(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes report.json, report.csv and manifest.json into cfg.output_dir.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result);

/// Runs jobs [0, count) on min(threads, count) workers (0: hardware
/// concurrency). Results land at their job index; the first exception by
/// index is rethrown after all workers finish.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job);

}  // namespace ising_lwc
