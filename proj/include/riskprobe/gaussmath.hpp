#pragma once

#include "riskprobe/common.hpp"

namespace riskprobe {

/// Multivariate normal distribution with a cached factorization.
///
/// The covariance is symmetrized on construction and must be positive
/// semidefinite (eigenvalues >= -1e-9). When a plain Cholesky factorization
/// fails the density factor is regularized with 1e-9 * I (escalated by
/// decades if still singular); `jitter()` reports the amount applied.
/// Sampling uses an exact square root of the unregularized covariance, so a
/// zero covariance samples the mean exactly.
class Gaussian {
 public:
  Gaussian(Vec mean, Mat cov);

  static Gaussian scalar(double mean, double variance);

  const Vec& mean() const { return mean_; }
  const Mat& cov() const { return cov_; }
  Eigen::Index dim() const { return mean_.size(); }

  /// Lower Cholesky factor of (cov + jitter * I).
  const Mat& density_factor() const { return chol_; }
  /// Sum of log diagonal of density_factor(), i.e. 0.5 * log det.
  double half_log_det() const { return half_log_det_; }
  double jitter() const { return jitter_; }
  /// Matrix S with S * S^T == cov (used for sampling).
  const Mat& sample_factor() const { return sample_factor_; }

 private:
  Vec mean_;
  Mat cov_;
  Mat chol_;
  Mat sample_factor_;
  double half_log_det_ = 0.0;
  double jitter_ = 0.0;
};

/// log N(x; g.mean, g.cov).
double log_density(const Gaussian& g, const Vec& x);

/// Closed-form KL(p || q) for Gaussians of equal dimension. Clamped at zero
/// from below only for round-off (never more than 1e-12).
double kl_divergence(const Gaussian& p, const Gaussian& q);

/// One draw mean + S * xi, xi ~ N(0, I), consuming dim() normals from rng.
Vec sample(const Gaussian& g, Rng& rng);

}  // namespace riskprobe
