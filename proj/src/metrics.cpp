#include "riskprobe/metrics.hpp"

#include <cmath>
#include <limits>

namespace riskprobe {

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Success:
      return "success";
    case Termination::Violation:
      return "violation";
    case Termination::Timeout:
      return "timeout";
    case Termination::Aborted:
      return "aborted";
  }
  return "unknown";
}

JerkStats jerk_stats(std::span<const Control> applied, double dt) {
  if (applied.size() < 3) throw InvalidInput("jerk_stats: need at least 3 controls");
  if (!(dt > 0.0)) throw InvalidInput("jerk_stats: dt must be positive");
  JerkStats out;
  for (std::size_t t = 1; t < applied.size(); ++t) {
    out.longitudinal += std::abs(applied[t].accel - applied[t - 1].accel) / dt;
  }
  out.longitudinal /= static_cast<double>(applied.size() - 1);
  for (std::size_t t = 2; t < applied.size(); ++t) {
    const double second = applied[t].yaw_rate - 2.0 * applied[t - 1].yaw_rate + applied[t - 2].yaw_rate;
    out.angular += std::abs(second) / (dt * dt);
  }
  out.angular /= static_cast<double>(applied.size() - 2);
  return out;
}

MetricStat mean_std(std::span<const double> values) {
  MetricStat s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  // Shifted by the first value so identical inputs give exactly zero spread.
  const double shift = values.front();
  double offset = 0.0;
  for (double v : values) offset += v - shift;
  offset /= static_cast<double>(values.size());
  s.mean = shift + offset;
  double var = 0.0;
  for (double v : values) var += (v - shift - offset) * (v - shift - offset);
  s.std = std::sqrt(var / static_cast<double>(values.size()));
  return s;
}

Summary aggregate(std::span<const RunResult> results) {
  if (results.empty()) throw InvalidInput("aggregate: empty result list");
  Summary s;
  s.runs = results.size();
  std::vector<double> times, gaps, speeds, long_jerk, ang_jerk;
  for (const auto& r : results) {
    switch (r.termination) {
      case Termination::Success:
        ++s.successes;
        times.push_back(r.completion_time);
        break;
      case Termination::Violation:
        ++s.violations;
        break;
      case Termination::Timeout:
        ++s.timeouts;
        break;
      case Termination::Aborted:
        ++s.aborted;
        break;
    }
    gaps.push_back(r.min_gap);
    speeds.push_back(r.mean_velocity);
    long_jerk.push_back(r.mean_abs_long_jerk);
    ang_jerk.push_back(r.mean_abs_ang_jerk);
  }
  s.success_rate = 100.0 * static_cast<double>(s.successes) / static_cast<double>(s.runs);
  s.completion_time = mean_std(times);
  s.min_gap = mean_std(gaps);
  s.mean_velocity = mean_std(speeds);
  s.long_jerk = mean_std(long_jerk);
  s.ang_jerk = mean_std(ang_jerk);
  return s;
}

}  // namespace riskprobe
