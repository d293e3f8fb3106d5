#include "riskprobe/geometry.hpp"

#include <cmath>
#include <numbers>

namespace riskprobe {

std::string_view to_string(ScenarioKind kind) {
  return kind == ScenarioKind::LaneMerge ? "lane_merge" : "intersection";
}

ScenarioKind parse_scenario_kind(std::string_view name) {
  if (name == "lane_merge" || name == "merge") return ScenarioKind::LaneMerge;
  if (name == "intersection") return ScenarioKind::Intersection;
  throw InvalidInput("unknown scenario kind '" + std::string(name) + "' (expected lane_merge|intersection)");
}

Geometry Geometry::lane_merge() { return Geometry{}; }

Geometry Geometry::intersection() {
  Geometry g;
  g.kind = ScenarioKind::Intersection;
  return g;
}

double Geometry::ego_to_conflict(const VehicleState& ego) const {
  return kind == ScenarioKind::LaneMerge ? merge_x - ego.x : -ego.x;
}

double Geometry::human_to_conflict(const VehicleState& human) const {
  return kind == ScenarioKind::LaneMerge ? merge_x - human.x : -human.y;
}

double Geometry::ego_reference_y(double x) const {
  if (kind == ScenarioKind::Intersection) return 0.0;
  const double start = merge_x - taper_length;
  if (x <= start) return lane_y + ramp_offset;
  if (x >= merge_x) return lane_y;
  const double phase = std::numbers::pi * (x - start) / taper_length;
  return lane_y + ramp_offset * 0.5 * (1.0 + std::cos(phase));
}

double Geometry::ego_reference_slope(double x) const {
  if (kind == ScenarioKind::Intersection) return 0.0;
  const double start = merge_x - taper_length;
  if (x <= start || x >= merge_x) return 0.0;
  const double phase = std::numbers::pi * (x - start) / taper_length;
  return -ramp_offset * 0.5 * std::sin(phase) * std::numbers::pi / taper_length;
}

Point Geometry::ego_point(const VehicleState& ego, double progress, double elapsed) const {
  const double x = ego.x + progress;
  const double error = ego.y - ego_reference_y(ego.x);
  return {x, ego_reference_y(x) + error * std::exp(-elapsed)};
}

Point Geometry::human_point(const VehicleState& human, double progress) const {
  if (kind == ScenarioKind::LaneMerge) return {human.x + progress, human.y};
  return {human.x, human.y + progress};
}

double Geometry::human_heading() const {
  return kind == ScenarioKind::LaneMerge ? 0.0 : 0.5 * std::numbers::pi;
}

double distance(const Point& a, const Point& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace riskprobe
