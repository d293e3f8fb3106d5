#pragma once

#include "riskprobe/common.hpp"
#include "riskprobe/geometry.hpp"

#include <array>
#include <cstddef>
#include <optional>

namespace riskprobe {

/// Intent indices used by the built-in mode sets and the human model.
namespace intent {
inline constexpr std::size_t kAggressive = 0;
inline constexpr std::size_t kNeutral = 1;
inline constexpr std::size_t kCooperative = 2;
inline constexpr std::size_t kCount = 3;
inline constexpr std::size_t kModesPerIntent = 3;
}  // namespace intent

struct HumanParams {
  std::size_t intent = intent::kCooperative;
  std::size_t mode = 1;
  double nominal_speed = 10.0;        ///< m/s
  double beta = 5.0;                  ///< logistic sharpness and speed-relaxation gain (1/s)
  double risk_threshold = 8.0;        ///< m, projected gap below which the human reacts
  double observation_noise_std = 0.3; ///< m/s
  double max_accel = 4.0;             ///< m/s^2
  /// Engaged speed fraction used instead of the (intent, mode) table; lets
  /// the ego's predictor realize arbitrary mode targets.
  std::optional<double> yield_override;
};

void validate(const HumanParams& p);

/// Fraction of nominal speed the human settles at when fully engaged in a
/// conflict, per (intent, mode). Aggressive modes never drop below 0.95.
double yield_factor(std::size_t intent, std::size_t mode);

/// Where the ego will be, relative to the conflict point, when the human
/// arrives there at its current speed (absolute value, m). Infinite once the
/// human is past the conflict point.
double projected_gap(const Geometry& geom, const VehicleState& human, const VehicleState& ego);

/// Logistic engagement in [0, 1]: 0.5 at gap == risk_threshold.
double conflict_activation(double gap, const HumanParams& p);

/// v_des = nominal * (1 - a * (1 - f)).
double desired_speed(const Geometry& geom, const VehicleState& human, const VehicleState& ego,
                     const HumanParams& p);

/// Deterministic human step: relax speed toward v_des with gain beta,
/// acceleration clamped to +-max_accel, speed kept in [0, 1.5 * nominal].
VehicleState human_response(const Geometry& geom, const VehicleState& human, const VehicleState& ego,
                            const HumanParams& p, double dt);

enum class ObservationFeatures {
  Speed,        ///< (v_h - reference_speed)
  SpeedAndGap,  ///< (v_h - reference_speed, d_h - d_e)
};

/// What the ego measures about the human. Speeds are reported relative to the
/// human's cruise speed observed before the interaction (`reference_speed`).
struct ObservationModel {
  ObservationFeatures features = ObservationFeatures::Speed;
  double reference_speed = 0.0;

  Eigen::Index dim() const { return features == ObservationFeatures::Speed ? 1 : 2; }
};

Vec observation_feature(const Geometry& geom, const VehicleState& human, const VehicleState& ego,
                        const ObservationModel& model);

/// Feature plus N(0, noise_std^2) on every component.
Vec observe(const Geometry& geom, const VehicleState& human, const VehicleState& ego, const HumanParams& p,
            const ObservationModel& model, Rng& rng);

}  // namespace riskprobe
