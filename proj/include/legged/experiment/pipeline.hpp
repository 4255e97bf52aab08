#pragma once

// Builds the smoothing problem for one preset from a dataset, solves it, and
// writes the plot-ready result tables.

#include <filesystem>
#include <string>
#include <vector>

#include "legged/experiment/config.hpp"
#include "legged/experiment/metrics.hpp"
#include "legged/graph/solver.hpp"
#include "legged/sim.hpp"

namespace legged {

struct Problem {
  FactorGraph graph;
  GraphValues initial;
  ContactSchedule schedule;
};

/// Nodes at every contact event; contact variables for feet on the ground
/// (contact presets only); initial values by IMU dead reckoning from the
/// first truth record, contacts from FK. Throws on inconsistent streams.
Problem build_problem(const Dataset& dataset, const EstimatorConfig& config);

struct RunResult {
  RunPreset preset = RunPreset::All;
  std::vector<StampedPose> estimate;
  std::vector<ErrorRecord> errors;
  OptimizeResult solve;
  double wall_seconds = 0.0;
};

RunResult run_estimator(const Dataset& dataset, const EstimatorConfig& config);

std::vector<StampedPose> truth_poses(const Dataset& dataset);

/// trajectory.txt, errors.txt, cdf_trans.txt, cdf_rot.txt, summary.txt.
/// Wall time is deliberately not written so outputs are reproducible.
void write_run_outputs(const std::filesystem::path& dir, const RunResult& result);

struct CompareRow {
  RunPreset preset;
  double median_translation = 0.0;
  double median_rotation = 0.0;
  std::size_t records = 0;
  std::size_t failures = 0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<std::vector<ErrorRecord>> pooled;  // aligned with rows
};

/// Generates one noisy dataset per seed, runs every preset on it, and pools
/// the error records per preset. Seeds run in parallel.
CompareResult compare_presets(const HarnessConfig& config, std::span<const std::uint64_t> seeds,
                              std::span<const RunPreset> presets,
                              const std::filesystem::path& out_dir = {});

void write_compare_outputs(const std::filesystem::path& dir, const CompareResult& result);

}  // namespace legged
