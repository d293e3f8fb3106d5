#pragma once

#include "riskprobe/dynamics.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace riskprobe {

enum class Termination { Success, Violation, Timeout, Aborted };

std::string_view to_string(Termination t);

struct RunResult {
  bool success = false;
  double completion_time = 0.0;  ///< s, meaningful only on success
  double min_gap = 0.0;          ///< minimum center distance over the run, m
  double mean_velocity = 0.0;    ///< ego, m/s
  double mean_abs_long_jerk = 0.0;
  double mean_abs_ang_jerk = 0.0;
  Termination termination = Termination::Timeout;
  std::size_t steps = 0;
  std::size_t truth_intent = 0;
  std::size_t truth_mode = 0;
  std::size_t infeasible_steps = 0;
  std::size_t degenerate_updates = 0;
  double final_entropy = 0.0;
};

struct JerkStats {
  double longitudinal = 0.0;  ///< mean |da/dt|, m/s^3
  double angular = 0.0;       ///< mean |d^2 r/dt^2|, rad/s^3
};

/// Needs at least 3 applied controls.
JerkStats jerk_stats(std::span<const Control> applied, double dt);

struct MetricStat {
  double mean = 0.0;
  double std = 0.0;  ///< population
  std::size_t count = 0;
};

MetricStat mean_std(std::span<const double> values);

struct Summary {
  std::size_t runs = 0;
  std::size_t successes = 0;
  std::size_t violations = 0;
  std::size_t timeouts = 0;
  std::size_t aborted = 0;
  double success_rate = 0.0;  ///< percent
  MetricStat completion_time;  ///< successful runs only
  MetricStat min_gap;
  MetricStat mean_velocity;
  MetricStat long_jerk;
  MetricStat ang_jerk;
};

Summary aggregate(std::span<const RunResult> results);

}  // namespace riskprobe
