#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "vad/errors.hpp"
#include "vad/synth.hpp"

namespace vad {
namespace {

SceneSpec small_spec() {
  SceneSpec s;
  s.width = 120;
  s.height = 80;
  s.frames = 30;
  s.walkers = 6;
  return s;
}

TEST(Synth, DeterministicForSeed) {
  SceneSpec s = small_spec();
  s.anomalies.push_back({});
  s.anomalies.back().onset = 5;
  const Scene a = generate(s), b = generate(s);
  for (int t = 0; t < s.frames; ++t) {
    EXPECT_EQ(a.video.frame(t), b.video.frame(t));
    EXPECT_EQ(a.truth.masks[t], b.truth.masks[t]);
  }
  s.seed = 2;
  const Scene c = generate(s);
  EXPECT_NE(a.video.frame(10), c.video.frame(10));
}

TEST(Synth, BackgroundIsSharedAcrossSeeds) {
  SceneSpec s = small_spec();
  s.walkers = 0;
  s.noise_amplitude = 0;
  const Scene a = generate(s);
  s.seed = 99;
  EXPECT_EQ(generate(s).video.frame(0), a.video.frame(0));
  s.background_seed = 8;
  EXPECT_NE(generate(s).video.frame(0), a.video.frame(0));
}

TEST(Synth, NormalSceneHasEmptyTruth) {
  const Scene s = generate(small_spec());
  ASSERT_EQ(s.truth.masks.size(), 30u);
  for (const auto& m : s.truth.masks) EXPECT_EQ(m.count(), 0);
}

TEST(Synth, TruthIsTheBlobFromOnset) {
  SceneSpec s = small_spec();
  s.anomalies.push_back({{30, 40}, {4, 8}, 12});
  const Scene scene = generate(s);
  int side = -1;
  for (int t = 0; t < s.frames; ++t) {
    const Frame& m = scene.truth.masks[t];
    const auto area = (m.array() != 0).count();
    if (t < 12) {
      EXPECT_EQ(area, 0) << t;
      continue;
    }
    if (side < 0) side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(area))));
    EXPECT_EQ(area, side * side) << t;  // fully in frame, never occluded
    EXPECT_GE(side, 30);
    EXPECT_LE(side, 40);
    // A solid square: its bounding box holds exactly `area` pixels.
    Eigen::Index r0 = m.rows(), r1 = -1, c0 = m.cols(), c1 = -1;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(r, c)) {
          r0 = std::min(r0, r);
          r1 = std::max(r1, r);
          c0 = std::min(c0, c);
          c1 = std::max(c1, c);
        }
    EXPECT_EQ((r1 - r0 + 1) * (c1 - c0 + 1), area);
  }
}

TEST(Synth, ValidationRules) {
  SceneSpec s = small_spec();
  s.anomalies.push_back({{15, 20}, {2, 3}, 0});  // neither 2x larger nor 2x faster
  EXPECT_THROW(generate(s), ConfigError);
  s.anomalies.back().speed = {4, 5};  // 2x faster is enough
  EXPECT_NO_THROW(s.validate());
  s.anomalies.back() = {{130, 130}, {4, 8}, 0};
  EXPECT_THROW(s.validate(), ConfigError);
  s = small_spec();
  s.walker_size = {8, 60};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(SceneSpecText, RoundTrip) {
  SceneSpec s = small_spec();
  s.noise_amplitude = 2.5;
  s.anomalies.push_back({{31, 39}, {4.5, 7}, 17});
  s.anomalies.push_back({});
  EXPECT_EQ(parse_scene_spec(format_scene_spec(s)), s);
  EXPECT_EQ(parse_scene_spec("# just defaults\n\n"), SceneSpec{});
  EXPECT_THROW(parse_scene_spec("colour = 3\n"), ConfigError);
  EXPECT_THROW(parse_scene_spec("frames = 2.5\n"), ConfigError);
  EXPECT_THROW(parse_scene_spec("walker_size = 8\n"), ConfigError);
}

TEST(Synth, WriteSceneLayout) {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "vad_synth_write";
  fs::remove_all(dir);
  SceneSpec s = small_spec();
  s.frames = 3;
  s.anomalies.push_back({{30, 40}, {4, 8}, 1});
  const Scene scene = generate(s);
  write_scene(dir, scene);
  EXPECT_EQ(frame_filename(7), "frame_00007.pgm");
  EXPECT_EQ(read_pnm(dir / "frames" / "frame_00002.pgm"), scene.video.frame(2));
  const Frame t = read_pnm(dir / "truth" / "frame_00001.pgm");
  EXPECT_EQ((t.array() == 255).count(), scene.truth.masks[1].count());
  EXPECT_EQ((t.array() == 0).count() + (t.array() == 255).count(), t.size());
}

}  // namespace
}  // namespace vad
