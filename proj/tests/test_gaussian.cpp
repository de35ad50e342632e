#include <cmath>
#include <random>

#include <Eigen/LU>
#include <Eigen/QR>
#include <gtest/gtest.h>

#include "vad/errors.hpp"
#include "vad/gaussian.hpp"

namespace vad {
namespace {

Eigen::MatrixXd gaussian_samples(int dim, int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd x(dim, n);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

TEST(FitGaussian, SampleMeanAndUnbiasedCovariance) {
  Eigen::MatrixXd x(2, 4);
  x << 1, 2, 3, 4,  //
      2, 4, 6, 9;
  const GaussianModel m = fit_gaussian(x, 0.0);
  EXPECT_NEAR(m.mean[0], 2.5, 1e-15);
  EXPECT_NEAR(m.mean[1], 5.25, 1e-15);
  EXPECT_NEAR(m.covariance(0, 0), 5.0 / 3.0, 1e-14);
  EXPECT_NEAR(m.covariance(0, 1), (-1.5 * -3.25 + -0.5 * -1.25 + 0.5 * 0.75 + 1.5 * 3.75) / 3, 1e-14);
  EXPECT_EQ(m.covariance(0, 1), m.covariance(1, 0));
}

TEST(FitGaussian, TwoPointAndLargeSample) {
  const GaussianModel two = fit_gaussian((Eigen::MatrixXd(1, 2) << 0, 2).finished(), 0.0);
  EXPECT_DOUBLE_EQ(two.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(two.covariance(0, 0), 2.0);
  const GaussianModel big = fit_gaussian(gaussian_samples(4, 10000, 9));
  EXPECT_LE((big.covariance.diagonal().array() - 1).abs().maxCoeff(), 0.05);
}

TEST(FitGaussian, RelativeRegularizer) {
  const Eigen::MatrixXd x = gaussian_samples(3, 50, 1);
  const GaussianModel m = fit_gaussian(x, 1e-6);
  EXPECT_NEAR(m.epsilon, 1e-6 * m.covariance.trace() / 3, 1e-20);
  // Constant data has zero trace; the relative factor becomes absolute.
  const GaussianModel flat = fit_gaussian(Eigen::MatrixXd::Constant(3, 10, 4.0), 1e-6);
  EXPECT_EQ(flat.epsilon, 1e-6);
  EXPECT_TRUE(flat.precision.allFinite());
}

TEST(FitGaussian, TooFewSamples) {
  EXPECT_THROW(fit_gaussian(gaussian_samples(5, 5, 1)), DataError);
  EXPECT_NO_THROW(fit_gaussian(gaussian_samples(5, 6, 1)));
}

TEST(Mahalanobis, IdentityCovarianceIsSquaredEuclidean) {
  const GaussianModel m = make_gaussian(Eigen::Vector2d(1, 1), Eigen::Matrix2d::Identity(), 0.0);
  EXPECT_NEAR(mahalanobis(m, Eigen::Vector2d(4, 5)), 25.0, 1e-12);
  EXPECT_EQ(mahalanobis(m, m.mean), 0.0);
}

TEST(Mahalanobis, NonNegativeAndZeroAtMean) {
  const GaussianModel m = fit_gaussian(gaussian_samples(6, 100, 2));
  const Eigen::MatrixXd probes = gaussian_samples(6, 200, 3) * 3;
  const Eigen::VectorXd s = mahalanobis_columns(m, probes);
  EXPECT_GE(s.minCoeff(), 0.0);
  EXPECT_NEAR(mahalanobis(m, m.mean), 0.0, 1e-12);
  for (int i = 0; i < 200; ++i) EXPECT_NEAR(s[i], mahalanobis(m, probes.col(i)), 1e-9 * (1 + s[i]));
}

TEST(Mahalanobis, MatchesExplicitInverse) {
  const Eigen::MatrixXd a = gaussian_samples(5, 5, 30);
  const Eigen::MatrixXd sigma = a * a.transpose() + Eigen::MatrixXd::Identity(5, 5);
  const Eigen::VectorXd mu = gaussian_samples(5, 1, 31);
  const GaussianModel m = make_gaussian(mu, sigma, 0.0);
  const Eigen::MatrixXd inv = sigma.inverse();
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd x = gaussian_samples(5, 1, 40 + k) * 2;
    const double want = (x - mu).dot(inv * (x - mu));
    EXPECT_NEAR(mahalanobis(m, x), want, 1e-10 * std::max(1.0, want));
  }
  EXPECT_THROW(mahalanobis(m, Eigen::VectorXd::Zero(4)), ConfigError);
}

TEST(Mahalanobis, InvariantUnderRotation) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd q = gaussian_samples(5, 5, 10 + trial).householderQr().householderQ();
    Eigen::VectorXd diag(5);
    for (int i = 0; i < 5; ++i) diag[i] = 0.5 + i;
    const Eigen::MatrixXd sigma = q * diag.asDiagonal() * q.transpose();
    const Eigen::VectorXd mu = gaussian_samples(5, 1, 20 + trial);
    const GaussianModel rotated = make_gaussian(q * mu, sigma, 0.0);
    const GaussianModel plain = make_gaussian(mu, diag.asDiagonal().toDenseMatrix(), 0.0);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd x = gaussian_samples(5, 1, 100 * trial + k);
      const double a = mahalanobis(plain, x);
      EXPECT_NEAR(mahalanobis(rotated, q * x), a, 1e-8 * std::max(1.0, a));
    }
  }
}

TEST(Mahalanobis, RankDeficientCovarianceStaysFinite) {
  // 1000-dim descriptors confined to a 500-dim subspace.
  const Eigen::MatrixXd basis = gaussian_samples(1000, 500, 5);
  const Eigen::MatrixXd x = basis * gaussian_samples(500, 1200, 6);
  const GaussianModel m = fit_gaussian(x);
  EXPECT_TRUE(m.precision.allFinite());
  const Eigen::VectorXd s = mahalanobis_columns(m, x.leftCols(50));
  EXPECT_TRUE(s.allFinite());
  EXPECT_GE(s.minCoeff(), 0.0);
  // Leaving the subspace is heavily penalized.
  Eigen::VectorXd off = m.mean;
  off[0] += 1.0;
  EXPECT_GT(mahalanobis(m, off), s.maxCoeff());
}

TEST(Percentile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 50), 2.5);
  EXPECT_DOUBLE_EQ(percentile({4, 1, 3, 2}, 100), 4.0);
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4, 5}, 25), 2.0);
  EXPECT_DOUBLE_EQ(percentile({10}, 99), 10.0);
  EXPECT_NEAR(percentile({0, 10}, 99), 9.9, 1e-12);
  EXPECT_THROW(percentile({}, 50), DataError);
  EXPECT_THROW(percentile({1}, 0), ConfigError);
}

TEST(Classify, ThresholdBoundaryIsNormal) {
  GaussianModel m = make_gaussian(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 0.0);
  EXPECT_THROW(classify_score(m, 1.0), ConfigError);
  Eigen::MatrixXd train(1, 4);
  train << 1, 2, 3, 4;  // scores 1, 4, 9, 16
  EXPECT_DOUBLE_EQ(calibrate_threshold(m, train, 50), 6.5);
  EXPECT_EQ(classify_score(m, 6.5).label, Label::Normal);
  EXPECT_EQ(classify_score(m, std::nextafter(6.5, 7.0)).label, Label::Anomaly);
  const PatchLabel l = classify_score(m, 13.0, 1.5);
  EXPECT_DOUBLE_EQ(l.ratio, 2.0);
  EXPECT_EQ(l.label, Label::Anomaly);
  EXPECT_EQ(classify_score(m, 13.0, 2.0).label, Label::Normal);
}

TEST(Classify, NinetyNinthPercentileFlagsAboutOnePercent) {
  const Eigen::MatrixXd train = gaussian_samples(6, 10000, 12);
  GaussianModel m = fit_gaussian(train);
  calibrate_threshold(m, train);
  int flagged = 0;
  for (int i = 0; i < 10000; ++i) flagged += classify_patch(m, train.col(i)).label == Label::Anomaly;
  EXPECT_EQ(flagged, 100);
  EXPECT_EQ(classify_patch(m, m.mean).label, Label::Normal);
}

TEST(Classify, ThresholdIsFlooredForDegenerateTraining) {
  GaussianModel m = fit_gaussian(Eigen::MatrixXd::Constant(2, 5, 1.0));
  EXPECT_EQ(calibrate_threshold(m, Eigen::MatrixXd::Constant(2, 5, 1.0)), 1e-12);
}

TEST(Classify, MonotoneInAlpha) {
  GaussianModel m = fit_gaussian(gaussian_samples(3, 200, 7));
  calibrate_threshold(m, gaussian_samples(3, 200, 7));
  const Eigen::MatrixXd probes = gaussian_samples(3, 300, 8) * 2;
  int previous = 301;
  for (double alpha = 0.25; alpha <= 8; alpha *= 1.5) {
    int flagged = 0;
    for (int i = 0; i < 300; ++i) flagged += classify_patch(m, probes.col(i), alpha).label == Label::Anomaly;
    EXPECT_LE(flagged, previous);
    previous = flagged;
  }
}

TEST(Fusion, TruthTables) {
  auto label = [](bool anomalous, double ratio) {
    return PatchLabel{anomalous ? Label::Anomaly : Label::Normal, ratio, ratio};
  };
  for (bool g : {false, true})
    for (bool l : {false, true}) {
      const PatchLabel pg = label(g, g ? 3.0 : 0.5), pl = label(l, l ? 2.0 : 0.7);
      EXPECT_EQ(fuse(pg, pl, FusionMode::ProseAnd).label == Label::Anomaly, g && l);
      EXPECT_EQ(fuse(pg, pl, FusionMode::Eq4Or).label == Label::Anomaly, g || l);
      EXPECT_EQ(fuse(pg, pl, FusionMode::GlobalOnly).label == Label::Anomaly, g);
      EXPECT_EQ(fuse(pg, pl, FusionMode::ProseAnd).ratio, std::min(pg.ratio, pl.ratio));
      EXPECT_EQ(fuse(pg, pl, FusionMode::Eq4Or).ratio, std::max(pg.ratio, pl.ratio));
      EXPECT_EQ(fuse(pg, pl, FusionMode::GlobalOnly).ratio, pg.ratio);
    }
}

TEST(Fusion, ParseNames) {
  EXPECT_EQ(parse_fusion_mode("prose_and"), FusionMode::ProseAnd);
  EXPECT_EQ(parse_fusion_mode("eq4_or"), FusionMode::Eq4Or);
  EXPECT_EQ(parse_fusion_mode("global_only"), FusionMode::GlobalOnly);
  for (FusionMode f : {FusionMode::ProseAnd, FusionMode::Eq4Or, FusionMode::GlobalOnly})
    EXPECT_EQ(parse_fusion_mode(to_string(f)), f);
  EXPECT_THROW(parse_fusion_mode("xor"), ConfigError);
}

}  // namespace
}  // namespace vad
