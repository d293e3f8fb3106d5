#pragma once

#include "riskprobe/dynamics.hpp"
#include "riskprobe/geometry.hpp"
#include "riskprobe/human.hpp"

namespace riskprobe {

/// Snapshot of the world an ego planner sees.
struct ScenarioState {
  VehicleState ego;
  VehicleState human;
  Geometry geometry;
  double elapsed = 0.0;  ///< s
  /// Feature space of z(t); its reference speed is the human's cruise speed
  /// observed before the interaction starts.
  ObservationModel observation;
};

}  // namespace riskprobe
