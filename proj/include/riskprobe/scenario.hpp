#pragma once

#include "riskprobe/belief.hpp"
#include "riskprobe/human.hpp"
#include "riskprobe/metrics.hpp"
#include "riskprobe/planner.hpp"
#include "riskprobe/state.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace riskprobe {

/// Ego on the ramp 30-50 m before the merge point at 7-10 m/s; human on the
/// main lane 25-55 m before it at 8-12 m/s. Rejects center distance < 5 m.
ScenarioState init_lane_merge(Rng& rng);

/// Ego along +x at 4-6 m/s, human along +y at 5-8 m/s, each 15-30 m from
/// the conflict zone center.
ScenarioState init_intersection(Rng& rng);

ScenarioState init_scenario(ScenarioKind kind, Rng& rng);

/// Footprint discs overlap: center distance < 2 * footprint_radius.
bool safety_violation(const ScenarioState& s);

/// Merge: ego past the merge point, within 0.5 m of the lane center and at
/// least 2 m longitudinally from the human. Intersection: ego's rear edge
/// beyond the far side of the conflict zone.
bool success_check(const ScenarioState& s);

/// Expert-prior mode set: 3 intents x 3 modes. Observation targets are speed
/// deviations from cruise, steering targets live in (ego speed, gap).
ModeSet default_mode_set(ScenarioKind kind, ObservationFeatures features = ObservationFeatures::Speed);

/// Ground-truth human settings for a run; unset ids are drawn per run.
struct HumanConfig {
  std::optional<std::size_t> intent;
  std::optional<std::size_t> mode;
  double beta = 5.0;
  double risk_threshold = 8.0;
  double observation_noise_std = 0.3;
  double max_accel = 4.0;
};

/// Replaces the built-in planner (tests stub the controller with this).
using ControllerOverride = std::function<Control(const ScenarioState&, const HierarchicalBelief&)>;

struct RunConfig {
  ScenarioKind scenario = ScenarioKind::LaneMerge;
  std::uint64_t seed = 0;
  double t_max = 4.0;  ///< s
  PlannerKind planner = PlannerKind::Ours;
  PlannerConfig planner_config;
  HumanConfig human;
  ModeSetPtr modes;  ///< default_mode_set(scenario) when null
  ObservationFeatures features = ObservationFeatures::Speed;
  std::optional<ScenarioState> initial_state;
  ControllerOverride controller;
  bool record_log = true;
};

/// Default T_max: 4 s merge, 6 s intersection, 12 s in comparison mode.
double default_t_max(ScenarioKind kind, bool comparison_mode = false);

struct StepLog {
  std::size_t step = 0;
  double t = 0.0;  ///< time after the step, s
  VehicleState ego;
  VehicleState human;
  Vec observation;
  std::vector<double> intent_probs;
  std::vector<double> mode_weights;  ///< flat
  double entropy = 0.0;              ///< belief the step was planned with
  std::vector<double> cvar;          ///< executed plan, per flat mode
  Control control;
  double u_norm = 0.0;
  bool degenerate = false;
  bool infeasible = false;
};

struct RunOutput {
  RunResult result;
  std::vector<StepLog> log;
  ModeSetPtr modes;
};

/// Observe, update, plan, act, propagate at 1/dt Hz until success, violation
/// or t_max. Deterministic given the config.
RunOutput run(const RunConfig& cfg);

}  // namespace riskprobe
