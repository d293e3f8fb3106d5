#include "riskprobe/baselines.hpp"

#include "block_solver.hpp"

#include <limits>

namespace riskprobe {

namespace {

constexpr std::size_t kConservativeKey = 0;

class OursPlanner final : public Planner {
 public:
  explicit OursPlanner(const PlannerConfig& cfg) : Planner(cfg) {}
  PlannerKind kind() const override { return PlannerKind::Ours; }
  PlanOutput plan(const ScenarioState& state, const HierarchicalBelief& b, Rng& rng) override {
    return plan_step(state, b, cfg_, rng, &warm_);
  }
};

class PassivePlanner final : public Planner {
 public:
  explicit PassivePlanner(const PlannerConfig& cfg) : Planner(cfg) {}
  PlannerKind kind() const override { return PlannerKind::Passive; }
  PlanOutput plan(const ScenarioState& state, const HierarchicalBelief& b, Rng& rng) override {
    return passive_plan(state, b, cfg_, rng, &warm_);
  }
};

class ConservativePlanner final : public Planner {
 public:
  explicit ConservativePlanner(const PlannerConfig& cfg) : Planner(cfg) {}
  PlannerKind kind() const override { return PlannerKind::Conservative; }
  PlanOutput plan(const ScenarioState& state, const HierarchicalBelief& b, Rng& rng) override {
    return conservative_plan(state, b, cfg_, rng, &warm_);
  }
};

}  // namespace

PlanOutput passive_plan(const ScenarioState& state, const HierarchicalBelief& b, const PlannerConfig& cfg, Rng& rng,
                        WarmStartCache* warm) {
  PlanStepOptions options;
  options.lambda_h = 0.0;
  options.influence_from_argmax = true;
  return plan_step(state, b, cfg, rng, warm, options);
}

PlanOutput conservative_plan(const ScenarioState& state, const HierarchicalBelief& b, const PlannerConfig& cfg,
                             Rng& rng, WarmStartCache* warm) {
  validate(cfg);
  const auto& ms = b.modes();
  const auto omega = joint_weights(b);
  const std::uint64_t base = rng();

  std::vector<std::size_t> active;
  for (std::size_t n = 0; n < omega.size(); ++n) {
    if (omega[n] > cfg.epsilon) active.push_back(n);
  }
  const bool fallback = active.empty();
  if (fallback) active.push_back(detail::argmax(omega));

  const RolloutWorld world = detail::rollout_world(state, cfg);
  std::vector<ModeRollouts> rollouts;
  rollouts.reserve(active.size());
  for (std::size_t n : active) {
    rollouts.emplace_back(world, ms.flat(n), cfg.horizon, cfg.samples, derive_seed(base, n));
  }
  const double weight_floor = fallback ? 1.0 : 0.0;
  const detail::PlanObjective objective = [&](std::span<const double> accels) {
    const auto ego = simulate_ego_path(world, accels);
    detail::PlanEval e;
    for (std::size_t j = 0; j < active.size(); ++j) {
      e.objective += std::max(omega[active[j]], weight_floor) * cvar(rollouts[j].costs(ego, cfg.cost), cfg.alpha);
    }
    e.constraint = e.objective;
    return e;
  };

  std::vector<double> warm_accels;
  const std::vector<double>* warm_ptr = nullptr;
  if (warm != nullptr) {
    auto it = warm->find(kConservativeKey);
    if (it != warm->end() && it->second.size() == cfg.horizon) {
      warm_accels = detail::accels_of(it->second);
      warm_ptr = &warm_accels;
    }
  }
  const auto solved = detail::minimize_blocks(objective, cfg, warm_ptr);
  const double yaw = path_tracking_yaw_rate(state.geometry, state.ego);

  PlanOutput out;
  auto& diag = out.diagnostics;
  diag.u_total = make_controls(detail::expand_blocks(solved.blocks, cfg.horizon), yaw, cfg);
  diag.entropy_before = entropy(b, cfg.entropy_form);
  diag.solver_iterations = solved.iterations;
  diag.blend_fallback = fallback;
  out.control = diag.u_total.front();

  const auto executed = simulate_ego_path(world, detail::accels_of(diag.u_total));
  diag.modes.resize(omega.size());
  for (std::size_t n = 0; n < omega.size(); ++n) {
    auto& md = diag.modes[n];
    md.intent = ms.flat(n).intent;
    md.mode = ms.flat(n).mode;
    md.omega = omega[n];
    const ModeRollouts r(world, ms.flat(n), cfg.horizon, cfg.samples, derive_seed(base, n, 1));
    md.cvar_executed = cvar(r.costs(executed, cfg.cost), cfg.alpha);
    md.cvar = md.cvar_executed;
    md.margin = cfg.risk_cap - md.cvar;
  }
  for (std::size_t n : active) {
    diag.modes[n].active = true;
    diag.modes[n].controls = diag.u_total;
    diag.modes[n].iterations = solved.iterations;
  }
  Rng after_rng = make_rng(base, omega.size(), 2);
  diag.entropy_after = expected_posterior_entropy(b, out.control, state, cfg.n_obs, cfg, after_rng);

  if (warm != nullptr) {
    warm->clear();
    (*warm)[kConservativeKey] = detail::shifted(diag.u_total);
  }
  return out;
}

std::unique_ptr<Planner> make_planner(PlannerKind kind, const PlannerConfig& cfg) {
  switch (kind) {
    case PlannerKind::Ours:
      return std::make_unique<OursPlanner>(cfg);
    case PlannerKind::Passive:
      return std::make_unique<PassivePlanner>(cfg);
    case PlannerKind::Conservative:
      return std::make_unique<ConservativePlanner>(cfg);
  }
  throw InvalidInput("make_planner: unknown planner kind");
}

}  // namespace riskprobe
