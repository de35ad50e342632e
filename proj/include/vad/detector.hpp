#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vad/autoencoder.hpp"
#include "vad/gaussian.hpp"
#include "vad/ssim.hpp"
#include "vad/video.hpp"

namespace vad {

struct DetectorConfig {
  CubeDims small{10, 10, 5};  ///< auto-encoder patch size
  CubeDims big{40, 40, 5};    ///< classification cube size
  AEHyper ae;
  SsimParams ssim;
  double global_percentile = kDefaultPercentile;
  double local_percentile = kDefaultPercentile;
  double relative_epsilon = kDefaultRelativeEpsilon;
  FusionMode fusion = FusionMode::ProseAnd;
  double alpha = 1.0;  ///< threshold multiplier used for labels and masks
  /// Upper bound on small patches sampled (seeded) for auto-encoder training.
  int ae_max_patches = 20000;

  void validate() const;
};

struct DetectorModels {
  AEModel ae;
  GaussianModel global;
  std::optional<GaussianModel> local;
  CubeDims big;
};

/// Trains the auto-encoder on sampled small patches, then fits and calibrates
/// the global (pooled features) and local (SSIM descriptors) Gaussians on the
/// big-cube grid of every training video.
DetectorModels train_detector(std::span<const FrameVolume> normal_videos,
                              const DetectorConfig& cfg);

struct CubeVerdict {
  PatchLabel global;
  PatchLabel local;
  PatchLabel fused;
};

struct SlabResult {
  int slab = 0;
  std::vector<CubeVerdict> cubes;  ///< row-major over the big grid
};

/// Consumes frames one at a time and scores each temporal slab as soon as its
/// last frame arrives. Only the previous slab is retained.
class StreamingDetector {
 public:
  StreamingDetector(const DetectorModels& models, const DetectorConfig& cfg, int width,
                    int height);

  std::optional<SlabResult> push(const Frame& frame);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  SlabResult score_slab();

  const DetectorModels& models_;
  DetectorConfig cfg_;
  int width_;
  int height_;
  int rows_;
  int cols_;
  int next_slab_ = 0;
  std::vector<Frame> previous_;
  std::vector<Frame> current_;
};

struct DetectionResult {
  CubeDims cube;
  int width = 0;
  int height = 0;
  int frame_count = 0;
  int rows = 0;
  int cols = 0;
  FusionMode fusion = FusionMode::ProseAnd;
  double alpha = 1.0;
  std::vector<SlabResult> slabs;
  std::vector<Frame> masks;          ///< 0 normal, 255 anomaly; one per frame
  std::vector<double> frame_scores;  ///< max fused ratio over covering cubes
  std::vector<double> slab_seconds;  ///< wall clock per slab, not persisted
};

DetectionResult detect(const DetectorModels& models, const FrameVolume& test,
                       const DetectorConfig& cfg);

/// Pixel mask of `frame` with cubes flagged when their fused ratio exceeds
/// `alpha`.
Frame render_mask(const DetectionResult& r, int frame, double alpha);

struct BenchStats {
  double median = 0.0;  ///< seconds per frame
  double p95 = 0.0;
  std::vector<double> samples;
};

/// Per-frame wall clock of the full detect path, excluding disk I/O.
BenchStats benchmark(const DetectorModels& models, const FrameVolume& test,
                     const DetectorConfig& cfg, int repeats);

}  // namespace vad
