#pragma once

#include "riskprobe/planner.hpp"

namespace riskprobe {

/// plan_step without probing (lambda_H = 0) and with every mode steered toward
/// the highest-omega mode's target. CVaR constraint retained.
PlanOutput passive_plan(const ScenarioState& state, const HierarchicalBelief& b, const PlannerConfig& cfg, Rng& rng,
                        WarmStartCache* warm = nullptr);

/// One control sequence minimizing sum over active modes of omega * CVaR;
/// no probing, no influence term. Hedges against every active mode at once.
PlanOutput conservative_plan(const ScenarioState& state, const HierarchicalBelief& b, const PlannerConfig& cfg,
                             Rng& rng, WarmStartCache* warm = nullptr);

}  // namespace riskprobe
