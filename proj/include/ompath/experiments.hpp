#pragma once

#include "ompath/optimize.hpp"
#include "ompath/tube.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ompath {

/// Direct minimizer and Euler-Lagrange shooting solution for example1
/// between its metastable states -2 and 2.
struct Example1Run {
  OptimizeResult minimizer;
  DiscretePath shooting;
  OmEvaluation shooting_om;
  double shooting_el_residual = 0.0;
  /// Sup-norm distance between the two paths.
  double max_difference = 0.0;
};

Example1Run run_example1(const OptimizerConfig& config);

/// One most probable path of example2 for scales (a, b).
struct Example2Run {
  double a = 1.0;
  double b = 1.0;
  OptimizeResult result;
  /// "linear" or "continuation" (warm start from the previous scale).
  std::string start;
};

/// Solves the scales in the given order. Each scale is tried from the linear
/// path and, when the previous scale converged, from that minimizer; the
/// converged candidate with the lowest functional wins, otherwise the one with
/// the smallest gradient is returned unconverged.
std::vector<Example2Run> run_example2_sweep(const std::vector<std::pair<double, double>>& scales,
                                            const OptimizerConfig& config);

/// OM values strictly monotone along the runs (either direction).
bool strictly_monotone_om(const std::vector<Example2Run>& runs);

/// Tube ratio experiment on the linear model f = -x, g = 1 between 0 and 1:
/// the discrete minimizer against the straight line.
struct RatioExperimentConfig {
  std::size_t reference_steps = 240;
  double epsilon = 0.35;
  HolderParams holder;
  std::size_t samples = 200000;
  std::uint64_t seed = 0;
  /// Candidate tube grids (must divide reference_steps); the largest whose
  /// pilot run (seed + 1) puts at least `min_hits` samples in both tubes is used.
  std::vector<std::size_t> tube_candidates = {2, 3, 4, 5, 6, 8, 10, 12};
  std::size_t min_hits = 200;
  /// Skip the pilot and use this grid.
  std::optional<std::size_t> tube_steps;
};

struct RatioExperiment {
  RatioCheck check;
  std::size_t tube_steps = 0;
  DiscretePath minimizer;
  DiscretePath straight;
};

RatioExperiment run_linear_ratio_experiment(const RatioExperimentConfig& config);

}  // namespace ompath
