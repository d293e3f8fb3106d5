#pragma once

#include "riskprobe/dynamics.hpp"

#include <string>
#include <string_view>

namespace riskprobe {

enum class ScenarioKind { LaneMerge, Intersection };

std::string_view to_string(ScenarioKind kind);
ScenarioKind parse_scenario_kind(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Road layout shared by the world simulation, the human model and the planner.
///
/// Lane merge: the human drives +x on the main lane (y = lane_y); the ego
/// drives +x on an on-ramp at y = lane_y + ramp_offset that tapers into the
/// main lane over `taper_length` metres ending at the merge point x = merge_x.
///
/// Intersection: the ego drives +x along y = 0, the human drives +y along
/// x = 0; the conflict zone is the square |x|, |y| <= zone_half_width.
struct Geometry {
  ScenarioKind kind = ScenarioKind::LaneMerge;
  double merge_x = 0.0;
  double lane_y = 0.0;
  double ramp_offset = -3.5;
  double taper_length = 20.0;
  double zone_half_width = 3.0;
  double footprint_radius = 1.0;

  static Geometry lane_merge();
  static Geometry intersection();

  /// Signed distance still to travel before reaching the conflict point
  /// (negative once past it).
  double ego_to_conflict(const VehicleState& ego) const;
  double human_to_conflict(const VehicleState& human) const;

  /// Lateral reference of the ego path at longitudinal position x, and its slope.
  double ego_reference_y(double x) const;
  double ego_reference_slope(double x) const;

  /// Ego position after advancing `progress` metres along its path; the current
  /// lateral tracking error decays with a 1 s time constant over `elapsed` seconds.
  Point ego_point(const VehicleState& ego, double progress, double elapsed) const;
  /// Human position after advancing `progress` metres along its lane.
  Point human_point(const VehicleState& human, double progress) const;

  /// Heading of the human's lane.
  double human_heading() const;
};

double distance(const Point& a, const Point& b);

}  // namespace riskprobe
