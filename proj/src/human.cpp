#include "riskprobe/human.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskprobe {

namespace {

constexpr std::array<std::array<double, intent::kModesPerIntent>, intent::kCount> kYieldFactors{{
    {1.0, 0.975, 0.95},  // aggressive
    {0.8, 0.7, 0.6},     // neutral
    {0.5, 0.4, 0.3},     // cooperative
}};

}  // namespace

void validate(const HumanParams& p) {
  if (!(p.beta > 0.0)) throw InvalidInput("HumanParams: beta must be positive");
  if (!(p.nominal_speed > 0.0)) throw InvalidInput("HumanParams: nominal_speed must be positive");
  if (!(p.observation_noise_std >= 0.0)) throw InvalidInput("HumanParams: observation noise std must be >= 0");
  if (!(p.risk_threshold > 0.0)) throw InvalidInput("HumanParams: risk_threshold must be positive");
  if (!(p.max_accel > 0.0)) throw InvalidInput("HumanParams: max_accel must be positive");
  if (p.yield_override) {
    if (!(*p.yield_override >= 0.0 && *p.yield_override <= 1.5)) {
      throw InvalidInput("HumanParams: yield override outside [0, 1.5]");
    }
  } else if (p.intent >= intent::kCount || p.mode >= intent::kModesPerIntent) {
    throw InvalidInput("HumanParams: (intent, mode) out of range");
  }
}

double yield_factor(std::size_t intent_id, std::size_t mode) {
  if (intent_id >= intent::kCount || mode >= intent::kModesPerIntent) {
    throw InvalidInput("yield_factor: (intent, mode) out of range");
  }
  return kYieldFactors[intent_id][mode];
}

double projected_gap(const Geometry& geom, const VehicleState& human, const VehicleState& ego) {
  const double d_h = geom.human_to_conflict(human);
  if (d_h < 0.0) return std::numeric_limits<double>::infinity();
  const double t_h = d_h / std::max(human.v, 1.0);
  return std::abs(geom.ego_to_conflict(ego) - ego.v * t_h);
}

double conflict_activation(double gap, const HumanParams& p) {
  if (std::isinf(gap)) return 0.0;
  return 1.0 / (1.0 + std::exp(-p.beta * (p.risk_threshold - gap) / p.risk_threshold));
}

double desired_speed(const Geometry& geom, const VehicleState& human, const VehicleState& ego,
                     const HumanParams& p) {
  const double a = conflict_activation(projected_gap(geom, human, ego), p);
  const double f = p.yield_override ? *p.yield_override : yield_factor(p.intent, p.mode);
  return p.nominal_speed * (1.0 - a * (1.0 - f));
}

VehicleState human_response(const Geometry& geom, const VehicleState& human, const VehicleState& ego,
                            const HumanParams& p, double dt) {
  if (dt == 0.0) return human;
  const double v_des = desired_speed(geom, human, ego, p);
  const double accel = std::clamp(p.beta * (v_des - human.v), -p.max_accel, p.max_accel);
  VehicleState next = step_vehicle(human, {accel, 0.0}, dt);
  next.v = std::clamp(next.v, 0.0, 1.5 * p.nominal_speed);
  return next;
}

Vec observation_feature(const Geometry& geom, const VehicleState& human, const VehicleState& ego,
                        const ObservationModel& model) {
  Vec z(model.dim());
  z[0] = human.v - model.reference_speed;
  if (model.features == ObservationFeatures::SpeedAndGap) {
    z[1] = geom.human_to_conflict(human) - geom.ego_to_conflict(ego);
  }
  return z;
}

Vec observe(const Geometry& geom, const VehicleState& human, const VehicleState& ego, const HumanParams& p,
            const ObservationModel& model, Rng& rng) {
  Vec z = observation_feature(geom, human, ego, model);
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z[i] += p.observation_noise_std * standard_normal(rng);
  }
  return z;
}

}  // namespace riskprobe
