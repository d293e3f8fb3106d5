#include "riskprobe/scenario.hpp"

#include "riskprobe/baselines.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace riskprobe {

namespace {

constexpr double kMinInitialDistance = 5.0;
constexpr int kMaxInitAttempts = 1000;

// Run-level rng streams.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kTruthStream = 2;
constexpr std::uint64_t kObserveStream = 3;
constexpr std::uint64_t kPlannerStream = 4;

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Point position(const VehicleState& s) { return {s.x, s.y}; }

double center_distance(const ScenarioState& s) { return distance(position(s.ego), position(s.human)); }

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.v) && std::isfinite(s.heading);
}

template <typename Draw>
ScenarioState rejection_sample(Rng& rng, Draw draw) {
  for (int attempt = 0; attempt < kMaxInitAttempts; ++attempt) {
    ScenarioState s = draw(rng);
    if (center_distance(s) >= kMinInitialDistance) {
      s.observation.reference_speed = s.human.v;
      return s;
    }
  }
  throw std::runtime_error("scenario initialization: rejection sampling did not terminate");
}

struct SteerSpec {
  double speed;
  double gap;
};

}  // namespace

ScenarioState init_lane_merge(Rng& rng) {
  return rejection_sample(rng, [](Rng& r) {
    ScenarioState s;
    s.geometry = Geometry::lane_merge();
    const auto& g = s.geometry;
    s.ego.v = uniform(r, 7.0, 10.0);
    s.human.v = uniform(r, 8.0, 12.0);
    s.ego.x = g.merge_x - uniform(r, 30.0, 50.0);
    s.ego.y = g.lane_y + g.ramp_offset;
    s.human.x = g.merge_x - uniform(r, 25.0, 55.0);
    s.human.y = g.lane_y;
    return s;
  });
}

ScenarioState init_intersection(Rng& rng) {
  return rejection_sample(rng, [](Rng& r) {
    ScenarioState s;
    s.geometry = Geometry::intersection();
    s.ego.v = uniform(r, 4.0, 6.0);
    s.human.v = uniform(r, 5.0, 8.0);
    s.ego.x = -uniform(r, 15.0, 30.0);
    s.human.y = -uniform(r, 15.0, 30.0);
    s.human.heading = 0.5 * std::numbers::pi;
    return s;
  });
}

ScenarioState init_scenario(ScenarioKind kind, Rng& rng) {
  return kind == ScenarioKind::LaneMerge ? init_lane_merge(rng) : init_intersection(rng);
}

bool safety_violation(const ScenarioState& s) { return center_distance(s) < 2.0 * s.geometry.footprint_radius; }

bool success_check(const ScenarioState& s) {
  const auto& g = s.geometry;
  if (g.kind == ScenarioKind::LaneMerge) {
    return s.ego.x >= g.merge_x && std::abs(s.ego.y - g.lane_y) <= 0.5 && std::abs(s.ego.x - s.human.x) >= 2.0;
  }
  return s.ego.x - g.footprint_radius >= g.zone_half_width;
}

ModeSet default_mode_set(ScenarioKind kind, ObservationFeatures features) {
  const bool merge = kind == ScenarioKind::LaneMerge;
  const double typical_speed = merge ? 10.0 : 6.5;
  const double speed_sd = 0.7;
  // Observation gap (d_h - d_e) when engaged: the aggressive human goes first.
  constexpr std::array<double, intent::kCount> kObservedGap{-8.0, 0.0, 8.0};
  const double gap_sd = 6.0;
  // Interaction configuration the ego steers toward at the horizon end.
  const std::array<SteerSpec, intent::kCount> steer =
      merge ? std::array<SteerSpec, intent::kCount>{{{8.0, -10.0}, {10.0, 6.0}, {11.0, 10.0}}}
            : std::array<SteerSpec, intent::kCount>{{{3.0, -8.0}, {6.0, 4.0}, {7.0, 8.0}}};
  const double steer_speed_sd = 1.0;
  const double steer_gap_sd = 3.0;
  constexpr std::array<std::array<const char*, intent::kModesPerIntent>, intent::kCount> kLabels{{
      {"holds speed", "slight lift", "lift then resume"},
      {"gradual deceleration", "moderate deceleration", "firm deceleration"},
      {"early yield", "yield", "strong yield"},
  }};

  std::vector<ModeTarget> targets;
  for (std::size_t i = 0; i < intent::kCount; ++i) {
    for (std::size_t k = 0; k < intent::kModesPerIntent; ++k) {
      const double mu = (yield_factor(i, k) - 1.0) * typical_speed;
      Gaussian obs = Gaussian::scalar(mu, speed_sd * speed_sd);
      if (features == ObservationFeatures::SpeedAndGap) {
        Vec m(2);
        m << mu, kObservedGap[i];
        obs = Gaussian(m, Eigen::Vector2d(speed_sd * speed_sd, gap_sd * gap_sd).asDiagonal().toDenseMatrix());
      }
      Vec sm(2);
      sm << steer[i].speed, steer[i].gap;
      Mat sc = Eigen::Vector2d(steer_speed_sd * steer_speed_sd, steer_gap_sd * steer_gap_sd).asDiagonal();
      targets.push_back({i, k, std::move(obs), Gaussian(sm, sc), kLabels[i][k]});
    }
  }
  return ModeSet(std::move(targets), {"aggressive", "neutral", "cooperative"});
}

double default_t_max(ScenarioKind kind, bool comparison_mode) {
  if (comparison_mode) return 12.0;
  return kind == ScenarioKind::LaneMerge ? 4.0 : 6.0;
}

RunOutput run(const RunConfig& cfg) {
  if (!(cfg.t_max > 0.0)) throw InvalidInput("RunConfig: t_max must be positive");
  validate(cfg.planner_config);
  const double dt = cfg.planner_config.dt;

  RunOutput out;
  out.modes = cfg.modes ? cfg.modes : std::make_shared<const ModeSet>(default_mode_set(cfg.scenario, cfg.features));

  Rng init_rng = make_rng(cfg.seed, kInitStream);
  ScenarioState state = cfg.initial_state ? *cfg.initial_state : init_scenario(cfg.scenario, init_rng);
  state.observation.features = cfg.features;
  if (!(state.observation.reference_speed > 0.0)) state.observation.reference_speed = state.human.v;
  if (state.observation.dim() != out.modes->observation_dim()) {
    throw InvalidInput("RunConfig: mode targets do not match the observation feature space");
  }

  Rng truth_rng = make_rng(cfg.seed, kTruthStream);
  HumanParams human;
  human.intent = cfg.human.intent ? *cfg.human.intent : static_cast<std::size_t>(truth_rng() % intent::kCount);
  human.mode = cfg.human.mode ? *cfg.human.mode : static_cast<std::size_t>(truth_rng() % intent::kModesPerIntent);
  human.nominal_speed = state.observation.reference_speed;
  human.beta = cfg.human.beta;
  human.risk_threshold = cfg.human.risk_threshold;
  human.observation_noise_std = cfg.human.observation_noise_std;
  human.max_accel = cfg.human.max_accel;
  validate(human);

  Rng observe_rng = make_rng(cfg.seed, kObserveStream);
  Rng planner_rng = make_rng(cfg.seed, kPlannerStream);
  std::unique_ptr<Planner> planner;
  if (!cfg.controller) planner = make_planner(cfg.planner, cfg.planner_config);

  HierarchicalBelief belief = uniform_belief(out.modes);
  auto& result = out.result;
  result.truth_intent = human.intent;
  result.truth_mode = human.mode;
  result.min_gap = center_distance(state);

  std::vector<Control> applied;
  double speed_sum = state.ego.v;
  std::size_t speed_count = 1;
  const auto max_steps = static_cast<std::size_t>(std::ceil(cfg.t_max / dt - 1e-9));
  result.termination = Termination::Timeout;

  for (std::size_t step = 0; step < max_steps; ++step) {
    const Vec z = observe(state.geometry, state.human, state.ego, human, state.observation, observe_rng);
    auto updated = update_or_hold(belief, z);
    belief = std::move(updated.belief);
    if (updated.degenerate) ++result.degenerate_updates;

    StepLog rec;
    rec.step = step;
    rec.observation = z;
    rec.entropy = entropy(belief, cfg.planner_config.entropy_form);
    rec.degenerate = updated.degenerate;

    Control u;
    if (cfg.controller) {
      u = cfg.controller(state, belief);
    } else {
      const PlanOutput plan = planner->plan(state, belief, planner_rng);
      u = plan.control;
      rec.infeasible = plan.diagnostics.infeasible;
      if (cfg.record_log) {
        for (const auto& m : plan.diagnostics.modes) rec.cvar.push_back(m.cvar_executed);
      }
    }
    if (rec.infeasible) ++result.infeasible_steps;
    applied.push_back(u);

    const VehicleState ego_next = step_vehicle(state.ego, u, dt);
    state.human = human_response(state.geometry, state.human, ego_next, human, dt);
    state.ego = ego_next;
    state.elapsed = static_cast<double>(step + 1) * dt;
    result.steps = step + 1;

    rec.t = state.elapsed;
    rec.ego = state.ego;
    rec.human = state.human;
    rec.control = u;
    rec.u_norm = std::hypot(u.accel, u.yaw_rate);
    if (cfg.record_log) {
      rec.intent_probs.assign(belief.intent_probs().begin(), belief.intent_probs().end());
      rec.mode_weights = belief.flat_mode_weights();
      out.log.push_back(std::move(rec));
    }

    if (!finite(state.ego) || !finite(state.human)) {
      result.termination = Termination::Aborted;
      break;
    }
    speed_sum += state.ego.v;
    ++speed_count;
    result.min_gap = std::min(result.min_gap, center_distance(state));
    if (safety_violation(state)) {
      result.termination = Termination::Violation;
      break;
    }
    if (success_check(state)) {
      result.termination = Termination::Success;
      result.success = true;
      result.completion_time = state.elapsed;
      break;
    }
  }

  result.mean_velocity = speed_sum / static_cast<double>(speed_count);
  if (applied.size() >= 3) {
    const auto jerk = jerk_stats(applied, dt);
    result.mean_abs_long_jerk = jerk.longitudinal;
    result.mean_abs_ang_jerk = jerk.angular;
  }
  result.final_entropy = entropy(belief, cfg.planner_config.entropy_form);
  return out;
}

}  // namespace riskprobe
