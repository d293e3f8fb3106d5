#pragma once

#include "riskprobe/belief.hpp"
#include "riskprobe/common.hpp"
#include "riskprobe/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace riskprobe {

/// m = max(1, ceil(alpha * S)), with alpha * S snapped to the nearest integer
/// when it is within 1e-9 relative of one (so 0.2 * 10 gives 2, never 3).
std::size_t cvar_tail_count(std::size_t sample_count, double alpha);

/// Mean of the m largest costs.
double cvar(std::span<const double> costs, double alpha);

struct CvarCheck {
  bool satisfied = false;
  double margin = 0.0;  ///< cap - CVaR (>= 0 when satisfied)
  double value = 0.0;   ///< CVaR itself
};

/// Per-sample discounted cost
///   J = sum_tau gamma^tau [w_c exp(-(d - d_safe)/l_d) + w_p max(0, v_ref - v_ego)/v_ref].
struct CostParams {
  double proximity_weight = 10.0;  ///< w_c
  double progress_weight = 1.0;    ///< w_p
  double safe_distance = 3.0;      ///< d_safe, m
  double proximity_scale = 2.0;    ///< l_d, m
  double discount = 0.95;          ///< gamma
  double reference_speed = 10.0;   ///< v_ref, m/s
};

/// Everything a rollout needs about the current world.
struct RolloutWorld {
  Geometry geometry;
  VehicleState ego;
  VehicleState human;
  double human_reference_speed = 0.0;  ///< cruise speed that observation deviations are relative to
  double human_gain = 5.0;             ///< relaxation rate toward sampled mode speeds (1/s)
  double dt = 0.1;
};

struct RolloutCostSet {
  std::size_t intent = 0;
  std::size_t mode = 0;
  std::vector<double> costs;
  std::uint64_t seed = 0;
};

/// Ego trajectory along its path under a planned acceleration profile.
struct EgoTrajectory {
  std::vector<Point> positions;  ///< after each step, length T
  std::vector<double> speeds;
};

EgoTrajectory simulate_ego_path(const RolloutWorld& world, std::span<const double> accels);

/// Pre-samples S human trajectories for one mode so many ego plans can be
/// scored against the same draws (common random numbers).
///
/// At step tau the human speed is v_now + (v_draw - v_now)(1 - exp(-gain (tau+1) dt)),
/// where v_draw = reference + speed component of an i.i.d. draw from the
/// mode's observation target.
class ModeRollouts {
 public:
  ModeRollouts(const RolloutWorld& world, const ModeTarget& mode, std::size_t horizon, std::size_t samples,
               std::uint64_t seed);

  std::size_t horizon() const { return horizon_; }
  std::size_t samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }

  /// Costs of every sample against a fixed ego trajectory.
  std::vector<double> costs(const EgoTrajectory& ego, const CostParams& params) const;

  /// Sampled human positions, samples() x horizon(), row-major by sample.
  const std::vector<Point>& human_positions() const { return positions_; }

 private:
  std::size_t horizon_;
  std::size_t samples_;
  std::uint64_t seed_;
  std::vector<Point> positions_;
};

/// Draws S rollouts of the given mode against `accels` (length = horizon).
RolloutCostSet rollout_costs(const RolloutWorld& world, std::span<const double> accels, const ModeTarget& mode,
                             std::size_t samples, const CostParams& params, std::uint64_t seed);

CvarCheck cvar_constraint_satisfied(const RolloutCostSet& c, double alpha, double cap);
CvarCheck cvar_constraint_satisfied(std::span<const double> costs, double alpha, double cap);

}  // namespace riskprobe
