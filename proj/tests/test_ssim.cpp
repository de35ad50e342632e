#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "vad/errors.hpp"
#include "vad/ssim.hpp"

namespace vad {
namespace {

RowMatrixXd random_patch(std::mt19937& rng, int h, int w) {
  std::uniform_int_distribution<int> pixel(0, 255);
  RowMatrixXd m(h, w);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = pixel(rng);
  return m;
}

oracle::Grid to_grid(const RowMatrixXd& m) {
  oracle::Grid g(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) g[r][c] = m(r, c);
  return g;
}

TEST(Ssim, IdenticalPatchesGiveOne) {
  std::mt19937 rng(1);
  for (int i = 0; i < 20; ++i) {
    const RowMatrixXd a = random_patch(rng, 10, 10);
    EXPECT_NEAR(ssim_frame(a, a), 1.0, 1e-12);
  }
  const RowMatrixXd flat = RowMatrixXd::Constant(10, 10, 128);
  EXPECT_NEAR(ssim_frame(flat, flat), 1.0, 1e-12);
}

TEST(Ssim, SymmetricAndBounded) {
  std::mt19937 rng(2);
  for (int i = 0; i < 200; ++i) {
    const RowMatrixXd a = random_patch(rng, 10, 10);
    const RowMatrixXd b = random_patch(rng, 10, 10);
    const double ab = ssim_frame(a, b);
    EXPECT_NEAR(ab, ssim_frame(b, a), 1e-12);
    EXPECT_GE(ab, -1.0);
    EXPECT_LE(ab, 1.0);
  }
  // Anti-correlated patches drive SSIM negative.
  RowMatrixXd a(2, 2), b(2, 2);
  a << 0, 255, 255, 0;
  b << 255, 0, 0, 255;
  EXPECT_LT(ssim_frame(a, b), 0.0);
  EXPECT_GE(ssim_frame(a, b), -1.0);
}

TEST(Ssim, ConstantBlackAgainstWhite) {
  const RowMatrixXd black = RowMatrixXd::Zero(10, 10);
  const RowMatrixXd white = RowMatrixXd::Constant(10, 10, 255);
  // c1 / (255² + c1) with c1 = (0.01·255)²
  EXPECT_NEAR(ssim_frame(black, white), 9.999000099990003e-05, 1e-15);
}

TEST(Ssim, MatchesScalarOracle) {
  std::mt19937 rng(3);
  for (int i = 0; i < 100; ++i) {
    const int h = 2 + i % 9, w = 3 + i % 7;
    const RowMatrixXd a = random_patch(rng, h, w);
    RowMatrixXd b = random_patch(rng, h, w);
    if (i % 3 == 0) b = (a.array() * 0.5 + 40).matrix();
    EXPECT_NEAR(ssim_frame(a, b), oracle::ssim(to_grid(a), to_grid(b)), 1e-12);
  }
}

TEST(Ssim, SlidingWindowAveragesLocalWindows) {
  std::mt19937 rng(4);
  const RowMatrixXd a = random_patch(rng, 10, 10);
  const RowMatrixXd b = random_patch(rng, 10, 10);
  SsimParams p;
  p.window = 7;
  double total = 0;
  for (int r = 0; r <= 3; ++r)
    for (int c = 0; c <= 3; ++c)
      total += oracle::ssim(to_grid(a.block(r, c, 7, 7)), to_grid(b.block(r, c, 7, 7)));
  EXPECT_NEAR(ssim_frame(a, b, p), total / 16, 1e-12);
  p.window = 10;
  EXPECT_NEAR(ssim_frame(a, b, p), ssim_frame(a, b), 1e-15);
}

TEST(Ssim, CubeIsMeanOverFrames) {
  std::mt19937 rng(5);
  Eigen::VectorXd da(500), db(500);
  for (int i = 0; i < 500; ++i) {
    da[i] = static_cast<double>(rng() % 256);
    db[i] = static_cast<double>(rng() % 256);
  }
  const Cube a({10, 10, 5}, {}, da), b({10, 10, 5}, {}, db);
  double mean = 0;
  for (int k = 0; k < 5; ++k) mean += ssim_frame(a.frame(k), b.frame(k)) / 5;
  EXPECT_NEAR(ssim_cube(a, b), mean, 1e-14);
  EXPECT_NEAR(ssim_cube(a, a), 1.0, 1e-12);
}

TEST(Ssim, RejectsMismatchedShapes) {
  EXPECT_THROW(ssim_frame(RowMatrixXd::Zero(3, 3), RowMatrixXd::Zero(3, 4)), ConfigError);
  const Cube a({10, 10, 5}, {}, Eigen::VectorXd::Zero(500));
  const Cube b({10, 10, 4}, {}, Eigen::VectorXd::Zero(400));
  EXPECT_THROW(ssim_cube(a, b), ConfigError);
}

}  // namespace
}  // namespace vad
