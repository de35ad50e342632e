#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "vad/errors.hpp"
#include "vad/video.hpp"

namespace vad {
namespace {

namespace fs = std::filesystem;

std::shared_ptr<const FrameVolume> ramp_volume(int w, int h, int frames) {
  std::vector<Frame> fr;
  for (int t = 0; t < frames; ++t) {
    Frame f(h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) f(y, x) = static_cast<std::uint8_t>((x + 3 * y + 7 * t) % 256);
    fr.push_back(f);
  }
  return std::make_shared<FrameVolume>(std::move(fr));
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("vad_video_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(FrameVolume, RejectsMixedSizes) {
  std::vector<Frame> fr{Frame::Zero(4, 4), Frame::Zero(4, 5)};
  try {
    FrameVolume v(fr);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_EQ(e.kind(), LoadError::Kind::DimensionMismatch);
  }
  EXPECT_THROW(FrameVolume(std::vector<Frame>{}), DataError);
}

TEST(LoadFrameSequence, ReadsIdenticalFramesInOrder) {
  const auto dir = scratch("identical");
  Frame f = Frame::Constant(240, 360, 77);
  for (int i = 0; i < 10; ++i) write_pgm(dir / ("f" + std::to_string(i) + ".pgm"), f);
  const FrameVolume v = load_frame_sequence(dir);
  EXPECT_EQ(v.height(), 240);
  EXPECT_EQ(v.width(), 360);
  EXPECT_EQ(v.frame_count(), 10);
  EXPECT_EQ(v.frame(3), f);
}

TEST(LoadFrameSequence, LexicographicOrderDefinesTime) {
  const auto dir = scratch("order");
  write_pgm(dir / "b.pgm", Frame::Constant(2, 2, 2));
  write_pgm(dir / "a.pgm", Frame::Constant(2, 2, 1));
  write_pgm(dir / "c.pgm", Frame::Constant(2, 2, 3));
  const FrameVolume v = load_frame_sequence(dir);
  for (int t = 0; t < 3; ++t) EXPECT_EQ(v.frame(t)(0, 0), t + 1);
}

TEST(LoadFrameSequence, DistinctErrors) {
  auto kind_of = [](const fs::path& dir) {
    try {
      load_frame_sequence(dir);
    } catch (const LoadError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "expected a load error";
    return LoadError::Kind::Decode;
  };
  EXPECT_EQ(kind_of("/nonexistent/vad/frames"), LoadError::Kind::MissingDirectory);
  const auto empty = scratch("empty");
  EXPECT_EQ(kind_of(empty), LoadError::Kind::NoMatchingFiles);
  const auto mixed = scratch("mixed");
  write_pgm(mixed / "a.pgm", Frame::Zero(4, 4));
  write_pgm(mixed / "b.pgm", Frame::Zero(5, 4));
  EXPECT_EQ(kind_of(mixed), LoadError::Kind::DimensionMismatch);
  const auto bad = scratch("bad");
  std::ofstream(bad / "a.pgm") << "P5\n4 4\n255\nxx";
  EXPECT_EQ(kind_of(bad), LoadError::Kind::Decode);
}

TEST(Pnm, ColorIsReducedToLuminance) {
  const auto dir = scratch("color");
  std::ofstream(dir / "c.ppm") << "P3\n# comment\n2 1\n255\n255 0 0  10 20 30\n";
  const Frame f = read_pnm(dir / "c.ppm");
  ASSERT_EQ(f.cols(), 2);
  EXPECT_EQ(f(0, 0), 76);  // round(0.299 * 255)
  EXPECT_EQ(f(0, 1), 18);  // round(2.99 + 11.74 + 3.42)
}

TEST(Pnm, BinaryRoundTrip) {
  const auto dir = scratch("roundtrip");
  std::mt19937 rng(3);
  Frame f(7, 5);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = static_cast<std::uint8_t>(rng());
  write_pgm(dir / "x.pgm", f);
  EXPECT_EQ(read_pnm(dir / "x.pgm"), f);
}

TEST(BuildGrid, ExtentsByFloorDivision) {
  const auto v = ramp_volume(360, 240, 30);
  const CubeGrid big = build_grid(v, {40, 40, 5});
  EXPECT_EQ(big.rows(), 6);
  EXPECT_EQ(big.cols(), 9);
  EXPECT_EQ(big.slabs(), 6);
  EXPECT_TRUE(big.crop_warning().empty());
  const CubeGrid small = build_grid(v, {10, 10, 5});
  EXPECT_EQ(small.rows(), 24);
  EXPECT_EQ(small.cols(), 36);
  EXPECT_EQ(small.slabs(), 6);
}

TEST(BuildGrid, WholeVolumeIsOneCube) {
  const CubeGrid g = build_grid(ramp_volume(10, 10, 5), {10, 10, 5});
  EXPECT_EQ(g.rows() * g.cols() * g.slabs(), 1);
}

TEST(BuildGrid, CropsRemaindersWithWarning) {
  const CubeGrid g = build_grid(ramp_volume(23, 17, 11), {5, 4, 3});
  EXPECT_EQ(g.cols(), 4);
  EXPECT_EQ(g.rows(), 4);
  EXPECT_EQ(g.slabs(), 3);
  EXPECT_FALSE(g.crop_warning().empty());
}

TEST(BuildGrid, RejectsOversizedCubes) {
  EXPECT_THROW(build_grid(ramp_volume(10, 10, 5), {11, 10, 5}), ConfigError);
  EXPECT_THROW(build_grid(ramp_volume(10, 10, 5), {10, 10, 6}), ConfigError);
  EXPECT_THROW(build_grid(ramp_volume(10, 10, 5), {0, 10, 5}), ConfigError);
}

// Every voxel of the cropped volume belongs to exactly one cube, and cube
// contents match the voxels at their footprint.
TEST(BuildGrid, TilingIsExactOnSmallGrids) {
  for (auto [w, h, t, cw, ch, ct] : {std::tuple{12, 9, 7, 3, 3, 2}, std::tuple{8, 8, 4, 4, 2, 4},
                                     std::tuple{7, 5, 3, 2, 5, 1}}) {
    const auto v = ramp_volume(w, h, t);
    const CubeGrid g = build_grid(v, {cw, ch, ct});
    std::vector<int> hits(static_cast<std::size_t>(w * h * t), 0);
    for (int s = 0; s < g.slabs(); ++s)
      for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) {
          const Cube cube = g.cube({r, c, s});
          const auto o = cube.origin();
          for (int k = 0; k < ct; ++k)
            for (int y = 0; y < ch; ++y)
              for (int x = 0; x < cw; ++x) {
                ++hits[static_cast<std::size_t>(((o.t + k) * h + o.y + y) * w + o.x + x)];
                EXPECT_EQ(cube.frame(k)(y, x), v->frame(o.t + k)(o.y + y, o.x + x));
              }
        }
    for (int k = 0; k < t; ++k)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const bool inside = x < g.cols() * cw && y < g.rows() * ch && k < g.slabs() * ct;
          EXPECT_EQ(hits[static_cast<std::size_t>((k * h + y) * w + x)], inside ? 1 : 0);
        }
  }
}

TEST(BuildGrid, DeterministicAndOrderIndependent) {
  const auto v = ramp_volume(40, 30, 10);
  const CubeGrid a = build_grid(v, {10, 10, 5});
  const CubeGrid b = build_grid(v, {10, 10, 5});
  for (int s = a.slabs() - 1; s >= 0; --s)
    for (int r = a.rows() - 1; r >= 0; --r)
      for (int c = 0; c < a.cols(); ++c)
        EXPECT_EQ(a.cube({r, c, s}).data(), b.cube({r, c, s}).data());
}

TEST(Rasterize, OrderingContract) {
  std::vector<Frame> fr{(Frame(2, 2) << 1, 2, 3, 4).finished()};
  const CubeGrid g = build_grid(std::make_shared<FrameVolume>(fr), {2, 2, 1});
  const Eigen::VectorXd v = rasterize(g.cube({0, 0, 0}));
  EXPECT_EQ(v, (Eigen::VectorXd(4) << 1, 2, 3, 4).finished());

  const CubeGrid small = build_grid(ramp_volume(20, 20, 5), {10, 10, 5});
  const Cube c = small.cube({1, 0, 0});
  const Eigen::VectorXd r = rasterize(c);
  EXPECT_EQ(r.size(), 500);
  for (int t = 0; t < 5; ++t)
    for (int row = 0; row < 10; ++row)
      for (int col = 0; col < 10; ++col) EXPECT_EQ(r[t * 100 + row * 10 + col], c.frame(t)(row, col));
  const Cube back = reshape(r, c.dims(), c.origin());
  EXPECT_EQ(back.data(), c.data());
  EXPECT_EQ(back.origin(), c.origin());
}

TEST(Subdivide, SixteenSubCubesTileParent) {
  const CubeGrid g = build_grid(ramp_volume(80, 40, 5), {40, 40, 5});
  const Cube big = g.cube({0, 1, 0});
  const auto parts = subdivide(big, {10, 10, 5});
  ASSERT_EQ(parts.size(), 16u);
  std::set<std::pair<int, int>> origins;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    EXPECT_EQ(p.dims(), (CubeDims{10, 10, 5}));
    EXPECT_EQ(p.origin().x, big.origin().x + static_cast<int>(i % 4) * 10);
    EXPECT_EQ(p.origin().y, big.origin().y + static_cast<int>(i / 4) * 10);
    origins.insert({p.origin().x, p.origin().y});
    for (int k = 0; k < 5; ++k)
      EXPECT_EQ(p.frame(k),
                big.frame(k).block(p.origin().y - big.origin().y, p.origin().x - big.origin().x, 10, 10));
  }
  EXPECT_EQ(origins.size(), 16u);
}

TEST(Subdivide, ConstantAndLocality) {
  const Cube flat({40, 40, 5}, {}, Eigen::VectorXd::Constant(8000, 9.0));
  for (const auto& p : subdivide(flat, {10, 10, 5})) EXPECT_EQ(p.data(), subdivide(flat, {10, 10, 5})[0].data());

  Eigen::VectorXd spot = Eigen::VectorXd::Zero(8000);
  spot[0] = 255;
  const auto parts = subdivide(Cube({40, 40, 5}, {}, spot), {10, 10, 5});
  for (std::size_t i = 0; i < parts.size(); ++i) EXPECT_EQ(parts[i].data().maxCoeff() > 0, i == 0);
}

TEST(Subdivide, RejectsNonDivisible) {
  const Cube c({40, 40, 5}, {}, Eigen::VectorXd::Zero(8000));
  EXPECT_THROW(subdivide(c, {15, 10, 5}), ConfigError);
  EXPECT_THROW(subdivide(c, {10, 10, 4}), ConfigError);
}

}  // namespace
}  // namespace vad
