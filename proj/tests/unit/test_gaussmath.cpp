#include "riskprobe/gaussmath.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace riskprobe;

namespace {

double normal_pdf(double x, double mean, double var) {
  return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

// Trapezoid quadrature of p ln(p/q) over +-12 sd of p.
double kl_by_quadrature(double mp, double vp, double mq, double vq) {
  const double sd = std::sqrt(vp);
  const double lo = mp - 12.0 * sd;
  const double hi = mp + 12.0 * sd;
  const int n = 200000;
  const double h = (hi - lo) / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + h * i;
    const double p = normal_pdf(x, mp, vp);
    if (p <= 0.0) continue;
    const double q = normal_pdf(x, mq, vq);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * p * std::log(p / q);
  }
  return sum * h;
}

}  // namespace

TEST(Gaussian, LogDensityStandardNormalAtZero) {
  EXPECT_NEAR(log_density(Gaussian::scalar(0.0, 1.0), Vec::Zero(1)), -0.5 * std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(Gaussian, LogDensityTwoDimensionalIdentity) {
  const Gaussian g(Vec::Zero(2), Mat::Identity(2, 2));
  EXPECT_NEAR(log_density(g, Vec::Zero(2)), -std::log(2.0 * std::numbers::pi), 1e-12);
}

TEST(Gaussian, LogDensitySymmetricForZeroMean) {
  Mat cov(2, 2);
  cov << 2.0, 0.3, 0.3, 0.5;
  const Gaussian g(Vec::Zero(2), cov);
  Vec x(2);
  x << 0.7, -1.9;
  EXPECT_DOUBLE_EQ(log_density(g, x), log_density(g, -x));
}

TEST(Gaussian, LogDensityRejectsDimensionMismatch) {
  EXPECT_THROW(log_density(Gaussian::scalar(0.0, 1.0), Vec::Zero(2)), InvalidInput);
}

TEST(Gaussian, DensityIntegratesToOne) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double mean = 10.0 * (uniform01(rng) - 0.5);
    const double sd = 0.2 + 3.0 * uniform01(rng);
    const Gaussian g = Gaussian::scalar(mean, sd * sd);
    const int n = 20000;
    const double lo = mean - 10.0 * sd;
    const double h = 20.0 * sd / n;
    double sum = 0.0;
    Vec x(1);
    for (int i = 0; i <= n; ++i) {
      x[0] = lo + h * i;
      sum += ((i == 0 || i == n) ? 0.5 : 1.0) * std::exp(log_density(g, x));
    }
    EXPECT_NEAR(sum * h, 1.0, 1e-3);
  }
}

TEST(Gaussian, SymmetrizesCovariance) {
  Mat cov(2, 2);
  cov << 1.0, 0.2, 0.4, 1.0;
  const Gaussian g(Vec::Zero(2), cov);
  EXPECT_DOUBLE_EQ(g.cov()(0, 1), g.cov()(1, 0));
  EXPECT_DOUBLE_EQ(g.cov()(0, 1), 0.3);
}

TEST(Gaussian, RejectsIndefiniteCovariance) {
  Mat cov(2, 2);
  cov << 1.0, 0.0, 0.0, -0.5;
  EXPECT_THROW(Gaussian(Vec::Zero(2), cov), InvalidInput);
}

TEST(Gaussian, SingularCovarianceIsJittered) {
  const Gaussian g(Vec::Zero(2), Mat::Zero(2, 2));
  EXPECT_GT(g.jitter(), 0.0);
  EXPECT_TRUE(std::isfinite(log_density(g, Vec::Zero(2))));
}

TEST(Kl, IdenticalIsZero) {
  Mat cov(2, 2);
  cov << 1.5, -0.2, -0.2, 0.8;
  Vec m(2);
  m << 1.0, -2.0;
  const Gaussian p(m, cov);
  EXPECT_EQ(kl_divergence(p, p), 0.0);
}

TEST(Kl, UnitShift) {
  EXPECT_NEAR(kl_divergence(Gaussian::scalar(0, 1), Gaussian::scalar(1, 1)), 0.5, 1e-12);
  EXPECT_NEAR(kl_by_quadrature(0, 1, 1, 1), 0.5, 1e-4);
}

TEST(Kl, VarianceRatio) {
  const double expected = 0.5 * (4.0 - 1.0 - std::log(4.0));
  EXPECT_NEAR(kl_divergence(Gaussian::scalar(0, 4), Gaussian::scalar(0, 1)), expected, 1e-12);
  EXPECT_NEAR(kl_by_quadrature(0, 4, 0, 1), expected, 1e-4);
}

TEST(Kl, MatchesQuadratureOnRandomPairs) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double mp = 4.0 * (uniform01(rng) - 0.5);
    const double mq = 4.0 * (uniform01(rng) - 0.5);
    const double vp = 0.3 + 2.0 * uniform01(rng);
    const double vq = 0.3 + 2.0 * uniform01(rng);
    EXPECT_NEAR(kl_divergence(Gaussian::scalar(mp, vp), Gaussian::scalar(mq, vq)), kl_by_quadrature(mp, vp, mq, vq),
                1e-4);
  }
}

TEST(Kl, NonNegative) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    Mat a = Mat::Random(3, 3);
    Mat b = Mat::Random(3, 3);
    const Gaussian p(Vec::Random(3), a * a.transpose() + 0.1 * Mat::Identity(3, 3));
    const Gaussian q(Vec::Random(3), b * b.transpose() + 0.1 * Mat::Identity(3, 3));
    EXPECT_GE(kl_divergence(p, q), 0.0);
  }
}

TEST(Kl, RejectsDimensionMismatch) {
  EXPECT_THROW(kl_divergence(Gaussian::scalar(0, 1), Gaussian(Vec::Zero(2), Mat::Identity(2, 2))), InvalidInput);
}

TEST(Sample, ZeroCovarianceReturnsMean) {
  Vec m(2);
  m << 3.0, -1.0;
  const Gaussian g(m, Mat::Zero(2, 2));
  Rng rng(1);
  const Vec x = sample(g, rng);
  EXPECT_EQ(x[0], 3.0);
  EXPECT_EQ(x[1], -1.0);
}

TEST(Sample, SeededDeterminism) {
  const Gaussian g(Vec::Zero(2), Mat::Identity(2, 2));
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) {
    const Vec x = sample(g, a);
    const Vec y = sample(g, b);
    EXPECT_EQ(x[0], y[0]);
    EXPECT_EQ(x[1], y[1]);
  }
}

TEST(Sample, StandardNormalMoments) {
  const Gaussian g = Gaussian::scalar(0.0, 1.0);
  Rng rng(3);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample(g, rng)[0];
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.05);
  EXPECT_NEAR(sum2 / n - mean * mean, 1.0, 0.05);
}

TEST(Sample, CovarianceMatchesTwoDimensional) {
  Mat cov(2, 2);
  cov << 2.0, 0.6, 0.6, 1.0;
  const Gaussian g(Vec::Zero(2), cov);
  Rng rng(8);
  const int n = 50000;
  Mat acc = Mat::Zero(2, 2);
  Vec mean = Vec::Zero(2);
  std::vector<Vec> xs;
  xs.reserve(n);
  for (int i = 0; i < n; ++i) {
    xs.push_back(sample(g, rng));
    mean += xs.back();
  }
  mean /= n;
  for (const auto& x : xs) acc += (x - mean) * (x - mean).transpose();
  acc /= n - 1;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(acc(r, c), cov(r, c), 0.05 * std::abs(cov(r, c)));
  }
}
