#pragma once

#include "riskprobe/planner.hpp"

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace riskprobe::detail {

struct PlanEval {
  double objective = 0.0;
  double constraint = 0.0;  ///< CVaR compared against the cap
  double probe = 0.0;
  double influence = 0.0;
};

struct BlockSolveResult {
  std::vector<double> blocks;
  PlanEval eval;
  double best_initial_objective = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool infeasible = false;
};

using PlanObjective = std::function<PlanEval(std::span<const double> accels)>;

/// Multi-start + projected central-difference descent over piecewise-constant
/// acceleration blocks. Returns the lowest-objective plan evaluated; when no
/// evaluated plan meets `cap` the one with the smallest constraint value is
/// returned instead and flagged infeasible.
BlockSolveResult minimize_blocks(const PlanObjective& objective, const PlannerConfig& cfg,
                                 const std::vector<double>* warm_accels,
                                 double cap = std::numeric_limits<double>::infinity());

/// Block averages of a per-step acceleration profile.
std::vector<double> blocks_of(std::span<const double> accels, std::size_t blocks);

}  // namespace riskprobe::detail
