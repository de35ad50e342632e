#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vad/eval.hpp"
#include "vad/video.hpp"

namespace vad {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

/// One large fast object entering the scene at `onset`.
struct AnomalySpec {
  Range size{30, 40};  ///< side length in pixels
  Range speed{4, 8};   ///< pixels per frame
  int onset = 40;
  friend bool operator==(const AnomalySpec&, const AnomalySpec&) = default;
};

struct SceneSpec {
  int width = 360;
  int height = 240;
  int frames = 200;
  /// Fixed-camera background; scenes of one site share this seed.
  std::uint64_t background_seed = 7;
  double background_amplitude = 40.0;  ///< texture deviation around mid gray
  double noise_amplitude = 3.0;        ///< per-frame sensor noise (std dev)
  int walkers = 24;
  Range walker_size{8, 14};
  Range walker_speed{1, 2};
  double jitter = 0.3;  ///< per-frame positional jitter (std dev, pixels)
  std::vector<AnomalySpec> anomalies;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

struct Scene {
  FrameVolume video;
  GroundTruth truth;  ///< exact anomaly pixels, 0/1
};

Scene generate(const SceneSpec& spec);

/// Key-value text, one `key = value` per line, `#` comments. Anomalies are
/// repeated `anomaly = size_lo size_hi speed_lo speed_hi onset` lines.
SceneSpec parse_scene_spec(const std::string& text);
std::string format_scene_spec(const SceneSpec& spec);

/// Writes frames/frame_NNNNN.pgm and truth/frame_NNNNN.pgm (0/255) under `dir`.
void write_scene(const std::filesystem::path& dir, const Scene& scene);

std::string frame_filename(int index);

}  // namespace vad
