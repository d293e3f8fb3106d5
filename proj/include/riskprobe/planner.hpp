#pragma once

#include "riskprobe/belief.hpp"
#include "riskprobe/dynamics.hpp"
#include "riskprobe/risk.hpp"
#include "riskprobe/state.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace riskprobe {

/// How the expected posterior entropy enters the objective.
enum class ProbeSign {
  ReduceEntropy,  ///< +lambda_H * E[H]: minimizing favours informative actions (default)
  Literal,        ///< -lambda_H * E[H]: ablation of the sign as literally written
};

struct SolverConfig {
  std::size_t iterations = 8;       ///< projected descent iterations after multi-start
  double step_size = 1.0;           ///< initial step length in block-acceleration units (m/s^2)
  std::size_t init_candidates = 5;  ///< constant-acceleration starts spanning [u_min, u_max]
  std::size_t blocks = 3;           ///< piecewise-constant acceleration blocks over the horizon
  double fd_step = 0.05;            ///< finite-difference half width (m/s^2)
  double penalty = 100.0;           ///< rho in rho * max(0, CVaR - cap)^2
};

struct PlannerConfig {
  std::size_t horizon = 30;  ///< T, steps
  double dt = 0.1;           ///< s
  double lambda_h = 0.5;
  double alpha = 0.05;
  std::size_t samples = 100;  ///< S
  double risk_cap = 25.0;     ///< J-bar, cost units
  double epsilon = 1e-5;
  Control u_min{-4.0, -0.6};
  Control u_max{3.0, 0.6};
  double beta = 5.0;         ///< human-model gain assumed by the ego
  double accel_noise = 0.05; ///< W, (m/s^2)^2
  std::size_t n_obs = 20;    ///< observation samples for expected entropy (doubled near max entropy)
  CostParams cost;           ///< includes the discount gamma (cost.discount)
  SolverConfig solver;
  EntropyForm entropy_form = EntropyForm::Literal;
  ProbeSign probe_sign = ProbeSign::ReduceEntropy;
  double human_risk_threshold = 8.0;  ///< ego's model of the human's reaction distance (m)
  double human_noise_std = 0.3;       ///< ego's model of the observation noise (m/s)

  double gamma() const { return cost.discount; }
};

void validate(const PlannerConfig& cfg);

/// Lateral path tracker supplying the yaw-rate channel of every plan.
double path_tracking_yaw_rate(const Geometry& geom, const VehicleState& ego);

/// Pairs a per-step acceleration plan with a constant yaw rate, clamped to bounds.
ControlSequence make_controls(std::span<const double> accels, double yaw_rate, const PlannerConfig& cfg);

/// Predicted interaction feature (ego speed, gap d_h - d_e) at the horizon end
/// via mean/covariance propagation of the longitudinal double integrator,
/// with the human advancing at the mode's expected speed.
Gaussian predicted_interaction(const ScenarioState& state, std::span<const double> accels, const ModeTarget& mode,
                               const PlannerConfig& cfg);

/// Monte-Carlo E[H(pi(t+1), w(t+1))] when the ego applies `first_control`.
double expected_posterior_entropy(const HierarchicalBelief& b, const Control& first_control,
                                  const ScenarioState& state, std::size_t n_obs, const PlannerConfig& cfg,
                                  Rng& rng);

double probe_objective(double expected_entropy, double lambda_h, ProbeSign sign = ProbeSign::ReduceEntropy);

/// KL(predicted || target).
double influence_objective(const Gaussian& predicted, const Gaussian& target);

struct SolveOptions {
  /// Mode whose steering target and human prediction form the influence
  /// term, in place of the solved mode's own (used by the passive baseline).
  const ModeTarget* influence_mode = nullptr;
  /// Overrides cfg.lambda_h (used by baselines).
  std::optional<double> lambda_h;
  /// Seed candidate from the previous step's solution.
  const ControlSequence* warm_start = nullptr;
  /// Disables the CVaR penalty (for computing unconstrained optima).
  bool unconstrained = false;
};

struct ModeSolution {
  ControlSequence controls;
  double objective = 0.0;
  double j_probe = 0.0;
  double j_influence = 0.0;
  double cvar = 0.0;
  double margin = 0.0;
  double best_initial_objective = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool infeasible = false;
};

/// Per-mode constrained solve: multi-start over constant accelerations, then
/// projected finite-difference descent on a piecewise-constant acceleration
/// profile. Deterministic given rng state.
ModeSolution solve_mode_control(const ScenarioState& state, const HierarchicalBelief& b, const ModeTarget& mode,
                                const PlannerConfig& cfg, Rng& rng, const SolveOptions& options = {});

struct WeightedControls {
  double omega = 0.0;
  const ControlSequence* controls = nullptr;
};

struct BlendResult {
  ControlSequence controls;
  bool fallback = false;  ///< no mode exceeded epsilon; argmax mode used
};

BlendResult blend_controls(std::span<const WeightedControls> per_mode, double epsilon, const PlannerConfig& cfg);

struct ModeDiagnostics {
  std::size_t intent = 0;
  std::size_t mode = 0;
  double omega = 0.0;
  bool active = false;
  double cvar = 0.0;           ///< CVaR of this mode's own solution (constraint value)
  double margin = 0.0;         ///< cap - cvar
  double cvar_executed = 0.0;  ///< CVaR of the executed (blended) plan under this mode
  bool infeasible = false;
  std::size_t iterations = 0;
  ControlSequence controls;
};

struct PlanDiagnostics {
  double entropy_before = 0.0;
  double entropy_after = 0.0;  ///< expected posterior entropy under the executed first control
  std::vector<ModeDiagnostics> modes;
  ControlSequence u_total;
  double j_probe = 0.0;      ///< omega-weighted over solved modes
  double j_influence = 0.0;  ///< omega-weighted over solved modes
  std::size_t solver_iterations = 0;
  bool blend_fallback = false;
  bool infeasible = false;  ///< any solved mode flagged infeasible
};

struct PlanOutput {
  Control control;
  PlanDiagnostics diagnostics;
};

/// Warm starts keyed by flat mode index (or a planner-specific key).
using WarmStartCache = std::map<std::size_t, ControlSequence>;

/// Variations of the receding-horizon step shared with the baselines.
struct PlanStepOptions {
  std::optional<double> lambda_h;
  /// Every solved mode is steered toward the highest-omega mode's target.
  bool influence_from_argmax = false;
};

/// One receding-horizon step of the full planner.
PlanOutput plan_step(const ScenarioState& state, const HierarchicalBelief& b, const PlannerConfig& cfg, Rng& rng,
                     WarmStartCache* warm = nullptr, const PlanStepOptions& options = {});

enum class PlannerKind { Ours, Passive, Conservative };

std::string_view to_string(PlannerKind kind);
PlannerKind parse_planner_kind(std::string_view name);

/// Shared interface so the run loop can swap planners.
class Planner {
 public:
  virtual ~Planner() = default;
  virtual PlannerKind kind() const = 0;
  virtual PlanOutput plan(const ScenarioState& state, const HierarchicalBelief& b, Rng& rng) = 0;
  void reset() { warm_.clear(); }
  const PlannerConfig& config() const { return cfg_; }

 protected:
  explicit Planner(PlannerConfig cfg) : cfg_(std::move(cfg)) { validate(cfg_); }
  PlannerConfig cfg_;
  WarmStartCache warm_;
};

std::unique_ptr<Planner> make_planner(PlannerKind kind, const PlannerConfig& cfg);

namespace detail {

/// Rollout inputs derived from the current world state.
RolloutWorld rollout_world(const ScenarioState& state, const PlannerConfig& cfg);
std::vector<double> expand_blocks(std::span<const double> blocks, std::size_t horizon);
std::vector<double> accels_of(const ControlSequence& controls);
/// Drops the executed first control and repeats the last one.
ControlSequence shifted(const ControlSequence& controls);
std::size_t argmax(std::span<const double> values);

}  // namespace detail

}  // namespace riskprobe
