#include "riskprobe/gaussmath.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numbers>

namespace riskprobe {

namespace {

constexpr double kJitter = 1e-9;
constexpr double kPsdTolerance = 1e-9;

bool debug_enabled() {
  static const bool enabled = std::getenv("RISKPROBE_DEBUG") != nullptr;
  return enabled;
}

bool all_finite(const Mat& m) { return m.allFinite(); }

}  // namespace

Gaussian::Gaussian(Vec mean, Mat cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  if (cov_.rows() != cov_.cols()) {
    throw InvalidInput("Gaussian: covariance must be square");
  }
  if (cov_.rows() != mean_.size()) {
    throw InvalidInput("Gaussian: mean dimension " + std::to_string(mean_.size()) +
                       " does not match covariance dimension " + std::to_string(cov_.rows()));
  }
  if (mean_.size() == 0) {
    throw InvalidInput("Gaussian: empty dimension");
  }
  if (!mean_.allFinite() || !all_finite(cov_)) {
    throw InvalidInput("Gaussian: non-finite parameters");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose()).eval();

  const auto n = cov_.rows();
  Eigen::LLT<Mat> llt(cov_);
  if (llt.info() == Eigen::Success) {
    chol_ = llt.matrixL();
    sample_factor_ = chol_;
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> eig(cov_);
    const Vec& lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -kPsdTolerance) {
      throw InvalidInput("Gaussian: covariance is not positive semidefinite (min eigenvalue " +
                         std::to_string(lambda.minCoeff()) + ")");
    }
    sample_factor_ = eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    for (double jitter = kJitter;; jitter *= 10.0) {
      Eigen::LLT<Mat> reg(cov_ + jitter * Mat::Identity(n, n));
      if (reg.info() == Eigen::Success) {
        chol_ = reg.matrixL();
        jitter_ = jitter;
        break;
      }
      if (jitter > 1.0) {
        throw InvalidInput("Gaussian: covariance could not be regularized");
      }
    }
    if (debug_enabled()) {
      std::cerr << "[riskprobe] Gaussian: applied covariance jitter " << jitter_ << '\n';
    }
  }
  half_log_det_ = chol_.diagonal().array().log().sum();
}

Gaussian Gaussian::scalar(double mean, double variance) {
  return Gaussian(Vec::Constant(1, mean), Mat::Constant(1, 1, variance));
}

double log_density(const Gaussian& g, const Vec& x) {
  const auto n = g.dim();
  if (x.size() != n) {
    throw InvalidInput("log_density: observation dimension " + std::to_string(x.size()) +
                       " does not match Gaussian dimension " + std::to_string(n));
  }
  // Forward substitution L y = x - mean without temporaries for small dims.
  const Mat& L = g.density_factor();
  double quad = 0.0;
  constexpr Eigen::Index kSmall = 16;
  std::array<double, kSmall> small{};
  Vec large;
  double* y = small.data();
  if (n > kSmall) {
    large.resize(n);
    y = large.data();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double acc = x[i] - g.mean()[i];
    for (Eigen::Index j = 0; j < i; ++j) {
      acc -= L(i, j) * y[j];
    }
    y[i] = acc / L(i, i);
    quad += y[i] * y[i];
  }
  return -0.5 * quad - g.half_log_det() - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double kl_divergence(const Gaussian& p, const Gaussian& q) {
  if (p.dim() != q.dim()) {
    throw InvalidInput("kl_divergence: dimension mismatch (" + std::to_string(p.dim()) + " vs " +
                       std::to_string(q.dim()) + ")");
  }
  const auto k = static_cast<double>(p.dim());
  const auto& Lq = q.density_factor();
  const auto Lq_view = Lq.triangularView<Eigen::Lower>();
  // tr(Sq^-1 Sp) = ||Lq^-1 Lp||_F^2 with Sp taken with its own jitter.
  const Mat m = Lq_view.solve(p.density_factor());
  const Vec d = Lq_view.solve(q.mean() - p.mean());
  const double trace_term = m.squaredNorm();
  const double quad = d.squaredNorm();
  const double log_det_ratio = 2.0 * (q.half_log_det() - p.half_log_det());
  const double kl = 0.5 * (trace_term + quad - k + log_det_ratio);
  return kl < 0.0 && kl > -1e-12 ? 0.0 : kl;
}

Vec sample(const Gaussian& g, Rng& rng) {
  Vec xi(g.dim());
  for (Eigen::Index i = 0; i < xi.size(); ++i) {
    xi[i] = standard_normal(rng);
  }
  return g.mean() + g.sample_factor() * xi;
}

}  // namespace riskprobe
