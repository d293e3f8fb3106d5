#pragma once

#include "riskprobe/common.hpp"

#include <vector>

namespace riskprobe {

/// Linear-Gaussian planning model x' = A x + B u, Sigma' = A Sigma A^T + B W B^T.
/// W is the covariance of the additive control (acceleration) noise.
struct LinearModel {
  LinearModel(Mat A, Mat B, Mat W);

  Mat A;
  Mat B;
  Mat W;
};

/// Per-axis double integrator with state (pos_0, vel_0, pos_1, vel_1, ...)
/// and control (acc_0, acc_1, ...), discretized with zero-order hold.
LinearModel double_integrator(Eigen::Index axes, double dt, const Mat& accel_noise);

Vec propagate_mean(const Vec& mean, const Vec& u, const LinearModel& m);
Mat propagate_cov(const Mat& cov, const LinearModel& m);

/// Planar kinematic state. Heading lives in (-pi, pi].
struct VehicleState {
  double x = 0.0;        ///< m
  double y = 0.0;        ///< m
  double v = 0.0;        ///< m/s, never negative
  double heading = 0.0;  ///< rad
};

struct Control {
  double accel = 0.0;     ///< m/s^2
  double yaw_rate = 0.0;  ///< rad/s
};

using ControlSequence = std::vector<Control>;

double wrap_angle(double angle);

/// Explicit-Euler unicycle step; speed clamps at zero (no reversing).
VehicleState step_vehicle(const VehicleState& s, const Control& u, double dt);

}  // namespace riskprobe
