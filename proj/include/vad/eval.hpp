#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "vad/detector.hpp"
#include "vad/pgm.hpp"

namespace vad {

/// Per-frame binary anomaly masks (any nonzero pixel is anomalous).
struct GroundTruth {
  std::vector<Frame> masks;
};

GroundTruth load_ground_truth(const std::filesystem::path& dir,
                              std::string_view pattern = "*.pgm");

/// The three pixel counts every judge depends on.
struct PixelCounts {
  std::int64_t detected = 0;  ///< |mask|
  std::int64_t truth = 0;     ///< |gt|
  std::int64_t overlap = 0;   ///< |mask ∩ gt|
};

PixelCounts count_pixels(const Frame& mask, const Frame& gt);

enum class Measure { Frame, Pixel, DualPixel };
enum class Verdict { TP, FP, TN, FN };

std::string_view to_string(Measure m);
Measure parse_measure(std::string_view text);

/// Fraction of ground-truth pixels a detection must cover at pixel level.
inline constexpr double kPixelCoverage = 0.40;

/// Verdict of one frame. Frame level: any detected pixel is a positive
/// prediction. Pixel level: a GT-positive frame is TP only if at least 40% of
/// its GT pixels are detected (otherwise FN). Dual pixel level additionally
/// requires at least `beta` of the detected pixels to lie inside the GT.
Verdict judge(const PixelCounts& c, Measure m, double beta = 0.0);

Verdict frame_level_judge(const Frame& mask, const Frame& gt);
Verdict pixel_level_judge(const Frame& mask, const Frame& gt);
Verdict dual_pixel_judge(const Frame& mask, const Frame& gt, double beta);

struct Confusion {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  void add(Verdict v);
  double tpr() const;
  double fpr() const;
};

struct RocPoint {
  double alpha = 0.0;  ///< NaN for the (0,0) and (1,1) anchors
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
};

/// Pixel counts per alpha (outer) and per frame (inner). A cube is detected
/// at alpha when its fused ratio exceeds alpha.
std::vector<std::vector<PixelCounts>> sweep_counts(const DetectionResult& r,
                                                   const GroundTruth& gt,
                                                   std::span<const double> alphas);

/// Sorted distinct positive fused ratios, thinned to at most `max_points` and
/// padded to at least ten values spanning (0, max ratio].
std::vector<double> default_alpha_sweep(const DetectionResult& r, int max_points = 512);

/// One ROC point per alpha under `m`, plus the two anchors.
RocCurve roc(const std::vector<std::vector<PixelCounts>>& counts, std::span<const double> alphas,
             Measure m, double beta = 0.0);

/// Equal error rate by linear interpolation where FPR = 1 - TPR.
double eer(const RocCurve& c);

/// Trapezoidal area over points sorted by FPR.
double auc(const RocCurve& c);

}  // namespace vad
