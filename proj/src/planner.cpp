#include "riskprobe/planner.hpp"

#include "block_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace riskprobe {

namespace {

constexpr double kLateralGain = 1.5;  // 1/(m s)
constexpr double kHeadingGain = 3.0;  // 1/s

double reference_speed_of(const ScenarioState& state) {
  return state.observation.reference_speed > 0.0 ? state.observation.reference_speed : state.human.v;
}

// Ego's model of the human when it follows mode `target`.
HumanParams predictor_params(const ScenarioState& state, const ModeTarget& target, const PlannerConfig& cfg) {
  HumanParams p;
  p.nominal_speed = std::max(reference_speed_of(state), 1e-3);
  p.beta = cfg.beta;
  p.risk_threshold = cfg.human_risk_threshold;
  p.observation_noise_std = cfg.human_noise_std;
  p.yield_override = std::clamp(1.0 + target.observation.mean()[0] / p.nominal_speed, 0.0, 1.5);
  return p;
}

// Mean/covariance propagation of the ego's longitudinal double integrator
// against a deterministic human advance at the mode's mean speed. Everything
// that does not depend on the plan is computed once.
class InteractionPredictor {
 public:
  InteractionPredictor(const ScenarioState& state, const ModeTarget& mode, const PlannerConfig& cfg)
      : model_(double_integrator(1, cfg.dt, Mat::Constant(1, 1, cfg.accel_noise))), v0_(state.ego.v) {
    gap0_ = state.geometry.human_to_conflict(state.human) - state.geometry.ego_to_conflict(state.ego);
    Mat cov = Mat::Zero(2, 2);
    for (std::size_t t = 0; t < cfg.horizon; ++t) cov = propagate_cov(cov, model_);

    const double ref = reference_speed_of(state);
    const double mean = mode.observation.mean()[0];
    const double sd = std::sqrt(std::max(0.0, mode.observation.cov()(0, 0)));
    const double v_now = state.human.v;
    double v = v_now;
    double var_h = 0.0;
    double blend_prev = 0.0;
    for (std::size_t tau = 0; tau < cfg.horizon; ++tau) {
      human_progress_ += v * cfg.dt;
      var_h += std::pow(cfg.dt * blend_prev * sd, 2);
      const double blend = 1.0 - std::exp(-cfg.beta * static_cast<double>(tau + 1) * cfg.dt);
      v = std::max(0.0, v_now + (ref + mean - v_now) * blend);
      blend_prev = blend;
    }
    // Feature (v, gap): gap = gap0 + s - p_h, so Var(gap) = Var(s) + Var(p_h).
    cov_ = Mat(2, 2);
    cov_ << cov(1, 1), cov(0, 1), cov(0, 1), cov(0, 0) + var_h;
  }

  Gaussian predict(std::span<const double> accels) const {
    Vec mu(2);
    mu << 0.0, v0_;
    Vec u(1);
    for (double a : accels) {
      u[0] = a;
      mu = propagate_mean(mu, u, model_);
    }
    Vec feature(2);
    feature << mu[1], gap0_ + mu[0] - human_progress_;
    return Gaussian(std::move(feature), cov_);
  }

 private:
  LinearModel model_;
  double v0_;
  double gap0_ = 0.0;
  double human_progress_ = 0.0;
  Mat cov_;
};

std::size_t effective_obs_count(const HierarchicalBelief& b, std::size_t n_obs, const PlannerConfig& cfg) {
  return entropy(b, cfg.entropy_form) > 0.75 * b.modes().max_entropy() ? 2 * n_obs : n_obs;
}

void check_mode(const HierarchicalBelief& b, const ModeTarget& mode) {
  const auto& ms = b.modes();
  if (mode.intent >= ms.intent_count() || mode.mode >= ms.mode_count(mode.intent)) {
    throw InvalidInput("solve_mode_control: mode not present in belief");
  }
}

}  // namespace

void validate(const PlannerConfig& c) {
  if (c.horizon < 1) throw InvalidInput("PlannerConfig: horizon must be >= 1");
  if (!(c.dt > 0.0)) throw InvalidInput("PlannerConfig: dt must be positive");
  if (!(c.lambda_h >= 0.0)) throw InvalidInput("PlannerConfig: lambda_h must be >= 0");
  if (!(c.alpha > 0.0 && c.alpha <= 1.0)) throw InvalidInput("PlannerConfig: alpha must lie in (0, 1]");
  if (c.samples < 1) throw InvalidInput("PlannerConfig: samples must be >= 1");
  if (!(c.epsilon > 0.0)) throw InvalidInput("PlannerConfig: epsilon must be positive");
  if (!(c.u_min.accel < c.u_max.accel) || !(c.u_min.yaw_rate < c.u_max.yaw_rate)) {
    throw InvalidInput("PlannerConfig: u_min must be below u_max componentwise");
  }
  if (!(c.beta > 0.0)) throw InvalidInput("PlannerConfig: beta must be positive");
  if (!(c.accel_noise >= 0.0)) throw InvalidInput("PlannerConfig: accel_noise must be >= 0");
  if (c.n_obs < 1) throw InvalidInput("PlannerConfig: n_obs must be >= 1");
  if (!(c.cost.discount > 0.0 && c.cost.discount <= 1.0)) throw InvalidInput("PlannerConfig: gamma must lie in (0, 1]");
  if (!(c.cost.reference_speed > 0.0) || !(c.cost.proximity_scale > 0.0)) {
    throw InvalidInput("PlannerConfig: cost reference speed and proximity scale must be positive");
  }
  if (c.solver.blocks < 1 || c.solver.blocks > c.horizon) {
    throw InvalidInput("PlannerConfig: solver.blocks must lie in [1, horizon]");
  }
  if (c.solver.init_candidates < 1) throw InvalidInput("PlannerConfig: solver.init_candidates must be >= 1");
  if (!(c.solver.fd_step > 0.0) || !(c.solver.step_size > 0.0)) {
    throw InvalidInput("PlannerConfig: solver step sizes must be positive");
  }
  if (!(c.solver.penalty >= 0.0)) throw InvalidInput("PlannerConfig: solver.penalty must be >= 0");
  if (!(c.human_risk_threshold > 0.0) || !(c.human_noise_std >= 0.0)) {
    throw InvalidInput("PlannerConfig: invalid human model parameters");
  }
}

double path_tracking_yaw_rate(const Geometry& geom, const VehicleState& ego) {
  constexpr double h = 0.05;
  const double slope = geom.ego_reference_slope(ego.x);
  const double curvature = (geom.ego_reference_slope(ego.x + h) - geom.ego_reference_slope(ego.x - h)) / (2.0 * h) /
                           std::pow(1.0 + slope * slope, 1.5);
  const double lateral_error = ego.y - geom.ego_reference_y(ego.x);
  const double heading_error = wrap_angle(ego.heading - std::atan(slope));
  return ego.v * curvature - kHeadingGain * heading_error - kLateralGain * lateral_error;
}

ControlSequence make_controls(std::span<const double> accels, double yaw_rate, const PlannerConfig& cfg) {
  ControlSequence out;
  out.reserve(accels.size());
  const double yaw = std::clamp(yaw_rate, cfg.u_min.yaw_rate, cfg.u_max.yaw_rate);
  for (double a : accels) out.push_back({std::clamp(a, cfg.u_min.accel, cfg.u_max.accel), yaw});
  return out;
}

Gaussian predicted_interaction(const ScenarioState& state, std::span<const double> accels, const ModeTarget& mode,
                               const PlannerConfig& cfg) {
  if (accels.size() != cfg.horizon) throw InvalidInput("predicted_interaction: plan length must equal horizon");
  return InteractionPredictor(state, mode, cfg).predict(accels);
}

double expected_posterior_entropy(const HierarchicalBelief& b, const Control& first_control,
                                  const ScenarioState& state, std::size_t n_obs, const PlannerConfig& cfg,
                                  Rng& rng) {
  if (n_obs < 1) throw InvalidInput("expected_posterior_entropy: n_obs must be >= 1");
  const auto& ms = b.modes();
  if (ms.observation_dim() != state.observation.dim()) {
    throw InvalidInput("expected_posterior_entropy: observation dimension mismatch");
  }
  const auto omega = joint_weights(b);
  std::vector<double> cumulative(omega.size());
  double acc = 0.0;
  for (std::size_t n = 0; n < omega.size(); ++n) cumulative[n] = acc += omega[n];

  const VehicleState ego_next = step_vehicle(state.ego, first_control, cfg.dt);
  // Predicted noise-free feature per mode.
  std::vector<Vec> predicted(omega.size());
  for (std::size_t n = 0; n < omega.size(); ++n) {
    if (omega[n] <= 0.0) continue;
    const auto p = predictor_params(state, ms.flat(n), cfg);
    const VehicleState human_next = human_response(state.geometry, state.human, ego_next, p, cfg.dt);
    predicted[n] = observation_feature(state.geometry, human_next, ego_next, state.observation);
  }

  double total = 0.0;
  for (std::size_t draw = 0; draw < n_obs; ++draw) {
    const double u = uniform01(rng) * acc;
    auto n = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    n = std::min(n, omega.size() - 1);
    while (omega[n] <= 0.0 && n > 0) --n;
    Vec z = predicted[n];
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] += cfg.human_noise_std * standard_normal(rng);
    total += entropy(update_or_hold(b, z).belief, cfg.entropy_form);
  }
  return total / static_cast<double>(n_obs);
}

double probe_objective(double expected_entropy, double lambda_h, ProbeSign sign) {
  if (!(lambda_h >= 0.0)) throw InvalidInput("probe_objective: lambda_h must be >= 0");
  const double value = lambda_h * expected_entropy;
  return sign == ProbeSign::ReduceEntropy ? value : -value;
}

double influence_objective(const Gaussian& predicted, const Gaussian& target) {
  return kl_divergence(predicted, target);
}

ModeSolution solve_mode_control(const ScenarioState& state, const HierarchicalBelief& b, const ModeTarget& mode,
                                const PlannerConfig& cfg, Rng& rng, const SolveOptions& options) {
  validate(cfg);
  check_mode(b, mode);
  const double lambda = options.lambda_h.value_or(cfg.lambda_h);
  const ModeTarget& influence = options.influence_mode != nullptr ? *options.influence_mode : mode;
  const std::uint64_t rollout_seed = rng();
  const std::uint64_t probe_seed = rng();

  const RolloutWorld world = detail::rollout_world(state, cfg);
  const ModeRollouts rollouts(world, mode, cfg.horizon, cfg.samples, rollout_seed);
  const std::size_t n_obs = effective_obs_count(b, cfg.n_obs, cfg);
  const double yaw = path_tracking_yaw_rate(state.geometry, state.ego);

  std::optional<InteractionPredictor> predictor;
  if (influence.steer) predictor.emplace(state, influence, cfg);

  std::map<double, double> probe_cache;
  const auto probe_at = [&](double a0) {
    if (lambda == 0.0) return 0.0;
    auto it = probe_cache.find(a0);
    if (it == probe_cache.end()) {
      Rng probe_rng(probe_seed);
      const Control first{a0, std::clamp(yaw, cfg.u_min.yaw_rate, cfg.u_max.yaw_rate)};
      const double h = expected_posterior_entropy(b, first, state, n_obs, cfg, probe_rng);
      it = probe_cache.emplace(a0, probe_objective(h, lambda, cfg.probe_sign)).first;
    }
    return it->second;
  };

  const detail::PlanObjective objective = [&](std::span<const double> accels) {
    detail::PlanEval e;
    const auto costs = rollouts.costs(simulate_ego_path(world, accels), cfg.cost);
    e.constraint = cvar(costs, cfg.alpha);
    e.probe = probe_at(accels.front());
    e.influence = predictor ? influence_objective(predictor->predict(accels), *influence.steer) : 0.0;
    e.objective = e.probe + e.influence;
    if (!options.unconstrained) {
      e.objective += cfg.solver.penalty * std::pow(std::max(0.0, e.constraint - cfg.risk_cap), 2);
    }
    return e;
  };

  std::vector<double> warm;
  if (options.warm_start != nullptr) warm = detail::accels_of(*options.warm_start);
  const auto solved = detail::minimize_blocks(objective, cfg, options.warm_start ? &warm : nullptr,
                                              options.unconstrained ? std::numeric_limits<double>::infinity()
                                                                    : cfg.risk_cap);

  ModeSolution out;
  out.controls = make_controls(detail::expand_blocks(solved.blocks, cfg.horizon), yaw, cfg);
  out.objective = solved.eval.objective;
  out.j_probe = solved.eval.probe;
  out.j_influence = solved.eval.influence;
  out.cvar = solved.eval.constraint;
  out.margin = cfg.risk_cap - out.cvar;
  out.best_initial_objective = solved.best_initial_objective;
  out.iterations = solved.iterations;
  out.evaluations = solved.evaluations;
  out.infeasible = solved.infeasible;
  return out;
}

BlendResult blend_controls(std::span<const WeightedControls> per_mode, double epsilon, const PlannerConfig& cfg) {
  if (per_mode.empty()) throw InvalidInput("blend_controls: empty mode set");
  std::size_t length = 0;
  for (const auto& m : per_mode) {
    if (m.controls == nullptr || m.controls->empty()) throw InvalidInput("blend_controls: missing control sequence");
    if (length != 0 && m.controls->size() != length) throw InvalidInput("blend_controls: length mismatch");
    length = m.controls->size();
  }
  BlendResult out;
  out.controls.assign(length, Control{});
  bool any = false;
  for (const auto& m : per_mode) {
    if (!(m.omega > epsilon)) continue;
    any = true;
    for (std::size_t t = 0; t < length; ++t) {
      out.controls[t].accel += m.omega * (*m.controls)[t].accel;
      out.controls[t].yaw_rate += m.omega * (*m.controls)[t].yaw_rate;
    }
  }
  if (!any) {
    std::size_t best = 0;
    for (std::size_t n = 1; n < per_mode.size(); ++n) {
      if (per_mode[n].omega > per_mode[best].omega) best = n;
    }
    out.controls = *per_mode[best].controls;
    out.fallback = true;
  }
  for (auto& c : out.controls) {
    c.accel = std::clamp(c.accel, cfg.u_min.accel, cfg.u_max.accel);
    c.yaw_rate = std::clamp(c.yaw_rate, cfg.u_min.yaw_rate, cfg.u_max.yaw_rate);
  }
  return out;
}

PlanOutput plan_step(const ScenarioState& state, const HierarchicalBelief& b, const PlannerConfig& cfg, Rng& rng,
                     WarmStartCache* warm, const PlanStepOptions& options) {
  validate(cfg);
  const auto& ms = b.modes();
  const auto omega = joint_weights(b);
  const std::uint64_t base = rng();
  const std::size_t lead = detail::argmax(omega);

  std::vector<std::size_t> active;
  for (std::size_t n = 0; n < omega.size(); ++n) {
    if (omega[n] > cfg.epsilon) active.push_back(n);
  }
  if (active.empty()) active.push_back(lead);

  PlanOutput out;
  auto& diag = out.diagnostics;
  diag.entropy_before = entropy(b, cfg.entropy_form);
  diag.modes.resize(omega.size());
  for (std::size_t n = 0; n < omega.size(); ++n) {
    diag.modes[n].intent = ms.flat(n).intent;
    diag.modes[n].mode = ms.flat(n).mode;
    diag.modes[n].omega = omega[n];
  }

  std::vector<WeightedControls> weighted;
  for (std::size_t n : active) {
    SolveOptions so;
    so.lambda_h = options.lambda_h;
    if (options.influence_from_argmax) so.influence_mode = &ms.flat(lead);
    if (warm != nullptr) {
      auto it = warm->find(n);
      if (it != warm->end() && it->second.size() == cfg.horizon) so.warm_start = &it->second;
    }
    Rng mode_rng = make_rng(base, n);
    const ModeSolution sol = solve_mode_control(state, b, ms.flat(n), cfg, mode_rng, so);
    auto& md = diag.modes[n];
    md.active = true;
    md.cvar = sol.cvar;
    md.margin = sol.margin;
    md.infeasible = sol.infeasible;
    md.iterations = sol.iterations;
    md.controls = sol.controls;
    diag.j_probe += omega[n] * sol.j_probe;
    diag.j_influence += omega[n] * sol.j_influence;
    diag.solver_iterations += sol.iterations;
    diag.infeasible = diag.infeasible || sol.infeasible;
  }
  for (std::size_t n : active) weighted.push_back({omega[n], &diag.modes[n].controls});

  auto blended = blend_controls(weighted, cfg.epsilon, cfg);
  diag.u_total = std::move(blended.controls);
  diag.blend_fallback = blended.fallback;
  out.control = diag.u_total.front();

  const RolloutWorld world = detail::rollout_world(state, cfg);
  const auto executed = simulate_ego_path(world, detail::accels_of(diag.u_total));
  for (std::size_t n = 0; n < omega.size(); ++n) {
    const ModeRollouts rollouts(world, ms.flat(n), cfg.horizon, cfg.samples, derive_seed(base, n, 1));
    diag.modes[n].cvar_executed = cvar(rollouts.costs(executed, cfg.cost), cfg.alpha);
    if (!diag.modes[n].active) {
      diag.modes[n].cvar = diag.modes[n].cvar_executed;
      diag.modes[n].margin = cfg.risk_cap - diag.modes[n].cvar;
    }
  }
  Rng after_rng = make_rng(base, omega.size(), 2);
  diag.entropy_after = expected_posterior_entropy(b, out.control, state, effective_obs_count(b, cfg.n_obs, cfg), cfg,
                                                  after_rng);

  if (warm != nullptr) {
    warm->clear();
    for (std::size_t n : active) (*warm)[n] = detail::shifted(diag.modes[n].controls);
  }
  return out;
}

std::string_view to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Ours:
      return "ours";
    case PlannerKind::Passive:
      return "passive";
    case PlannerKind::Conservative:
      return "conservative";
  }
  return "unknown";
}

PlannerKind parse_planner_kind(std::string_view name) {
  if (name == "ours") return PlannerKind::Ours;
  if (name == "passive") return PlannerKind::Passive;
  if (name == "conservative") return PlannerKind::Conservative;
  throw InvalidInput("unknown planner '" + std::string(name) + "' (expected ours|passive|conservative)");
}

namespace detail {

RolloutWorld rollout_world(const ScenarioState& state, const PlannerConfig& cfg) {
  RolloutWorld w;
  w.geometry = state.geometry;
  w.ego = state.ego;
  w.human = state.human;
  w.human_reference_speed = reference_speed_of(state);
  w.human_gain = cfg.beta;
  w.dt = cfg.dt;
  return w;
}

std::vector<double> accels_of(const ControlSequence& controls) {
  std::vector<double> out;
  out.reserve(controls.size());
  for (const auto& c : controls) out.push_back(c.accel);
  return out;
}

ControlSequence shifted(const ControlSequence& controls) {
  if (controls.empty()) return controls;
  ControlSequence out(controls.begin() + 1, controls.end());
  out.push_back(controls.back());
  return out;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("argmax: empty input");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace detail

}  // namespace riskprobe
