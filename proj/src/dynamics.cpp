#include "riskprobe/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace riskprobe {

LinearModel::LinearModel(Mat A_, Mat B_, Mat W_) : A(std::move(A_)), B(std::move(B_)), W(std::move(W_)) {
  if (A.rows() != A.cols()) {
    throw InvalidInput("LinearModel: A must be square");
  }
  if (B.rows() != A.rows()) {
    throw InvalidInput("LinearModel: B must have as many rows as A");
  }
  if (W.rows() != W.cols() || W.rows() != B.cols()) {
    throw InvalidInput("LinearModel: W must be square with the control dimension of B");
  }
  if (!A.allFinite() || !B.allFinite() || !W.allFinite()) {
    throw InvalidInput("LinearModel: non-finite entries");
  }
  const Mat Ws = 0.5 * (W + W.transpose());
  if (Eigen::SelfAdjointEigenSolver<Mat>(Ws, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < -1e-9) {
    throw InvalidInput("LinearModel: W is not positive semidefinite");
  }
  W = Ws;
}

LinearModel double_integrator(Eigen::Index axes, double dt, const Mat& accel_noise) {
  if (axes < 1 || !(dt > 0.0)) {
    throw InvalidInput("double_integrator: need axes >= 1 and dt > 0");
  }
  Mat A = Mat::Identity(2 * axes, 2 * axes);
  Mat B = Mat::Zero(2 * axes, axes);
  for (Eigen::Index a = 0; a < axes; ++a) {
    A(2 * a, 2 * a + 1) = dt;
    B(2 * a, a) = 0.5 * dt * dt;
    B(2 * a + 1, a) = dt;
  }
  return LinearModel(std::move(A), std::move(B), accel_noise);
}

Vec propagate_mean(const Vec& mean, const Vec& u, const LinearModel& m) {
  if (mean.size() != m.A.rows() || u.size() != m.B.cols()) {
    throw InvalidInput("propagate_mean: dimension mismatch");
  }
  return m.A * mean + m.B * u;
}

Mat propagate_cov(const Mat& cov, const LinearModel& m) {
  if (cov.rows() != m.A.rows() || cov.cols() != m.A.rows()) {
    throw InvalidInput("propagate_cov: dimension mismatch");
  }
  Mat next = m.A * cov * m.A.transpose() + m.B * m.W * m.B.transpose();
  return 0.5 * (next + next.transpose());
}

double wrap_angle(double angle) {
  constexpr double pi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * pi);  // in [-pi, pi]
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

VehicleState step_vehicle(const VehicleState& s, const Control& u, double dt) {
  if (!std::isfinite(s.x) || !std::isfinite(s.y) || !std::isfinite(s.v) || !std::isfinite(s.heading) ||
      !std::isfinite(u.accel) || !std::isfinite(u.yaw_rate) || !std::isfinite(dt)) {
    throw InvalidInput("step_vehicle: non-finite input");
  }
  if (!(dt > 0.0)) {
    throw InvalidInput("step_vehicle: dt must be positive");
  }
  VehicleState n;
  n.x = s.x + s.v * std::cos(s.heading) * dt;
  n.y = s.y + s.v * std::sin(s.heading) * dt;
  n.v = std::max(0.0, s.v + u.accel * dt);
  n.heading = wrap_angle(s.heading + u.yaw_rate * dt);
  return n;
}

}  // namespace riskprobe
