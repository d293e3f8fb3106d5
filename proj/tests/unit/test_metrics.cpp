#include "riskprobe/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace riskprobe;

namespace {

RunResult result(bool success, double time = 0.0, double gap = 5.0) {
  RunResult r;
  r.success = success;
  r.termination = success ? Termination::Success : Termination::Timeout;
  r.completion_time = time;
  r.min_gap = gap;
  return r;
}

}  // namespace

TEST(Jerk, ConstantAccelerationIsZero) {
  const std::vector<Control> u(10, Control{1.5, 0.2});
  const auto j = jerk_stats(u, 0.1);
  EXPECT_EQ(j.longitudinal, 0.0);
  EXPECT_EQ(j.angular, 0.0);
}

TEST(Jerk, RampMatchesSlope) {
  const double slope = 2.5, dt = 0.1;
  std::vector<Control> u;
  for (int t = 0; t < 30; ++t) u.push_back({-1.0 + slope * dt * t, 0.0});
  EXPECT_NEAR(jerk_stats(u, dt).longitudinal, slope, 1e-9);
}

TEST(Jerk, YawRampHasNoAngularJerk) {
  std::vector<Control> u;
  for (int t = 0; t < 30; ++t) u.push_back({0.0, 0.01 * t});
  EXPECT_NEAR(jerk_stats(u, 0.1).angular, 0.0, 1e-9);
}

TEST(Jerk, RejectsShortTrajectories) {
  const std::vector<Control> u(2);
  EXPECT_THROW(jerk_stats(u, 0.1), InvalidInput);
}

TEST(Aggregate, SuccessRate) {
  std::vector<RunResult> rs;
  for (int i = 0; i < 100; ++i) rs.push_back(result(i < 96, 2.0));
  const auto s = aggregate(rs);
  EXPECT_DOUBLE_EQ(s.success_rate, 96.0);
  EXPECT_EQ(s.successes, 96u);
  EXPECT_EQ(s.timeouts, 4u);
  EXPECT_EQ(s.completion_time.count, 96u);
}

TEST(Aggregate, IdenticalResultsHaveZeroStd) {
  const std::vector<RunResult> rs(7, result(true, 3.3, 4.0));
  const auto s = aggregate(rs);
  EXPECT_EQ(s.completion_time.std, 0.0);
  EXPECT_EQ(s.min_gap.std, 0.0);
}

TEST(Aggregate, PopulationStd) {
  const std::vector<RunResult> rs{result(true, 2.0), result(true, 4.0)};
  const auto s = aggregate(rs);
  EXPECT_DOUBLE_EQ(s.completion_time.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.completion_time.std, 1.0);
}

TEST(Aggregate, TimesOverSuccessesOnly) {
  const std::vector<RunResult> rs{result(true, 2.0, 1.0), result(false, 100.0, 3.0)};
  const auto s = aggregate(rs);
  EXPECT_DOUBLE_EQ(s.completion_time.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.min_gap.mean, 2.0);
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(6);
  std::vector<RunResult> rs;
  for (int i = 0; i < 50; ++i) rs.push_back(result(uniform01(rng) < 0.7, 1.0 + 5.0 * uniform01(rng), 10.0 * uniform01(rng)));
  const auto a = aggregate(rs);
  std::shuffle(rs.begin(), rs.end(), rng);
  const auto b = aggregate(rs);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_NEAR(a.completion_time.mean, b.completion_time.mean, 1e-12);
  EXPECT_NEAR(a.min_gap.std, b.min_gap.std, 1e-12);
  EXPECT_GE(a.success_rate, 0.0);
  EXPECT_LE(a.success_rate, 100.0);
}

TEST(Aggregate, RejectsEmpty) { EXPECT_THROW(aggregate(std::vector<RunResult>{}), InvalidInput); }
