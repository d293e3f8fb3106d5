#include "riskprobe/risk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace riskprobe {

std::size_t cvar_tail_count(std::size_t sample_count, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidInput("cvar: alpha must lie in (0, 1]");
  }
  const double product = alpha * static_cast<double>(sample_count);
  const double nearest = std::round(product);
  double m = std::abs(product - nearest) <= 1e-9 * std::max(1.0, product) ? nearest : std::ceil(product);
  m = std::clamp(m, 1.0, static_cast<double>(sample_count));
  return static_cast<std::size_t>(m);
}

double cvar(std::span<const double> costs, double alpha) {
  if (costs.empty()) {
    throw InvalidInput("cvar: empty cost vector");
  }
  const auto m = cvar_tail_count(costs.size(), alpha);
  std::vector<double> sorted(costs.begin(), costs.end());
  std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(m), sorted.end(),
                    std::greater<>());
  double sum = 0.0;
  for (std::size_t s = 0; s < m; ++s) {
    sum += sorted[s];
  }
  return sum / static_cast<double>(m);
}

EgoTrajectory simulate_ego_path(const RolloutWorld& world, std::span<const double> accels) {
  EgoTrajectory traj;
  traj.positions.reserve(accels.size());
  traj.speeds.reserve(accels.size());
  double v = world.ego.v;
  double progress = 0.0;
  for (std::size_t tau = 0; tau < accels.size(); ++tau) {
    progress += v * world.dt;
    v = std::max(0.0, v + accels[tau] * world.dt);
    traj.positions.push_back(
        world.geometry.ego_point(world.ego, progress, static_cast<double>(tau + 1) * world.dt));
    traj.speeds.push_back(v);
  }
  return traj;
}

ModeRollouts::ModeRollouts(const RolloutWorld& world, const ModeTarget& mode, std::size_t horizon,
                           std::size_t samples, std::uint64_t seed)
    : horizon_(horizon), samples_(samples), seed_(seed) {
  if (horizon == 0 || samples == 0) {
    throw InvalidInput("ModeRollouts: horizon and sample count must be positive");
  }
  Rng rng(seed);
  const double mean = mode.observation.mean()[0];
  const double sd = std::sqrt(std::max(0.0, mode.observation.cov()(0, 0)));
  std::vector<double> blend(horizon);
  for (std::size_t tau = 0; tau < horizon; ++tau) {
    blend[tau] = 1.0 - std::exp(-world.human_gain * static_cast<double>(tau + 1) * world.dt);
  }
  positions_.resize(samples * horizon);
  const double v_now = world.human.v;
  for (std::size_t s = 0; s < samples; ++s) {
    double progress = 0.0;
    double v = v_now;
    for (std::size_t tau = 0; tau < horizon; ++tau) {
      progress += v * world.dt;
      const double v_draw = world.human_reference_speed + mean + sd * standard_normal(rng);
      v = std::max(0.0, v_now + (v_draw - v_now) * blend[tau]);
      positions_[s * horizon + tau] = world.geometry.human_point(world.human, progress);
    }
  }
}

std::vector<double> ModeRollouts::costs(const EgoTrajectory& ego, const CostParams& params) const {
  if (ego.positions.size() != horizon_) {
    throw InvalidInput("ModeRollouts::costs: ego trajectory length does not match horizon");
  }
  // The progress term and discount factors are shared by every sample.
  std::vector<double> discount(horizon_);
  double progress_cost = 0.0;
  double g = 1.0;
  for (std::size_t tau = 0; tau < horizon_; ++tau) {
    discount[tau] = g;
    progress_cost += g * params.progress_weight *
                     std::max(0.0, params.reference_speed - ego.speeds[tau]) / params.reference_speed;
    g *= params.discount;
  }
  std::vector<double> out(samples_);
  const double inv_scale = 1.0 / params.proximity_scale;
  for (std::size_t s = 0; s < samples_; ++s) {
    const Point* human = positions_.data() + s * horizon_;
    double prox = 0.0;
    for (std::size_t tau = 0; tau < horizon_; ++tau) {
      const double d = distance(ego.positions[tau], human[tau]);
      prox += discount[tau] * std::exp(-(d - params.safe_distance) * inv_scale);
    }
    out[s] = params.proximity_weight * prox + progress_cost;
  }
  return out;
}

RolloutCostSet rollout_costs(const RolloutWorld& world, std::span<const double> accels, const ModeTarget& mode,
                             std::size_t samples, const CostParams& params, std::uint64_t seed) {
  if (accels.empty()) {
    throw InvalidInput("rollout_costs: empty plan");
  }
  for (double a : accels) {
    if (!std::isfinite(a)) throw InvalidInput("rollout_costs: non-finite control");
  }
  const ModeRollouts rollouts(world, mode, accels.size(), samples, seed);
  return RolloutCostSet{mode.intent, mode.mode, rollouts.costs(simulate_ego_path(world, accels), params), seed};
}

CvarCheck cvar_constraint_satisfied(std::span<const double> costs, double alpha, double cap) {
  const double value = cvar(costs, alpha);
  return {value <= cap, cap - value, value};
}

CvarCheck cvar_constraint_satisfied(const RolloutCostSet& c, double alpha, double cap) {
  return cvar_constraint_satisfied(c.costs, alpha, cap);
}

}  // namespace riskprobe
