#include "vad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vad/errors.hpp"
#include "vad/video.hpp"

namespace vad {
namespace {

std::vector<RocPoint> sorted_points(const RocCurve& c) {
  auto pts = c.points;
  std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
    return a.fpr != b.fpr ? a.fpr < b.fpr : a.tpr < b.tpr;
  });
  return pts;
}

}  // namespace

GroundTruth load_ground_truth(const std::filesystem::path& dir, std::string_view pattern) {
  const auto files = list_frames(dir, pattern);
  if (files.empty()) {
    throw LoadError(LoadError::Kind::NoMatchingFiles,
                    "no ground-truth masks matching '" + std::string(pattern) + "' in " +
                        dir.string());
  }
  GroundTruth gt;
  for (const auto& f : files) {
    Frame m = read_pnm(f);
    gt.masks.push_back((m.array() != 0).cast<std::uint8_t>().matrix());
  }
  return gt;
}

PixelCounts count_pixels(const Frame& mask, const Frame& gt) {
  if (mask.rows() != gt.rows() || mask.cols() != gt.cols()) {
    throw DataError("mask and ground truth differ in size");
  }
  PixelCounts c;
  const auto m = mask.array() != 0;
  const auto g = gt.array() != 0;
  c.detected = m.count();
  c.truth = g.count();
  c.overlap = (m && g).count();
  return c;
}

std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::Frame:
      return "frame";
    case Measure::Pixel:
      return "pixel";
    case Measure::DualPixel:
      return "dual_pixel";
  }
  return "?";
}

Measure parse_measure(std::string_view text) {
  if (text == "frame") return Measure::Frame;
  if (text == "pixel") return Measure::Pixel;
  if (text == "dual_pixel" || text == "dual") return Measure::DualPixel;
  throw ConfigError("unknown measure '" + std::string(text) + "'");
}

Verdict judge(const PixelCounts& c, Measure m, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0, 1]");
  const bool predicted = c.detected > 0;
  if (c.truth == 0) return predicted ? Verdict::FP : Verdict::TN;
  bool hit = predicted;
  if (m != Measure::Frame) {
    // 10·overlap >= 4·truth is the 40% rule without rounding.
    hit = 10 * c.overlap >= 4 * c.truth;
    if (m == Measure::DualPixel) {
      hit = hit && static_cast<double>(c.overlap) >= beta * static_cast<double>(c.detected);
    }
  }
  return hit ? Verdict::TP : Verdict::FN;
}

Verdict frame_level_judge(const Frame& mask, const Frame& gt) {
  return judge(count_pixels(mask, gt), Measure::Frame);
}

Verdict pixel_level_judge(const Frame& mask, const Frame& gt) {
  return judge(count_pixels(mask, gt), Measure::Pixel);
}

Verdict dual_pixel_judge(const Frame& mask, const Frame& gt, double beta) {
  return judge(count_pixels(mask, gt), Measure::DualPixel, beta);
}

void Confusion::add(Verdict v) {
  switch (v) {
    case Verdict::TP:
      ++tp;
      break;
    case Verdict::FP:
      ++fp;
      break;
    case Verdict::TN:
      ++tn;
      break;
    case Verdict::FN:
      ++fn;
      break;
  }
}

double Confusion::tpr() const {
  return tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
}

double Confusion::fpr() const {
  return fp + tn > 0 ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
}

std::vector<std::vector<PixelCounts>> sweep_counts(const DetectionResult& r,
                                                   const GroundTruth& gt,
                                                   std::span<const double> alphas) {
  if (static_cast<int>(gt.masks.size()) != r.frame_count) {
    throw DataError("ground truth has " + std::to_string(gt.masks.size()) + " frames, detection " +
                    std::to_string(r.frame_count));
  }
  // Cubes never overlap, so per-frame counts are sums of per-cube counts.
  const std::size_t per_slab = static_cast<std::size_t>(r.rows) * r.cols;
  const std::int64_t area = static_cast<std::int64_t>(r.cube.w) * r.cube.h;
  std::vector<std::int64_t> truth(gt.masks.size(), 0);
  std::vector<std::vector<std::int64_t>> cube_truth(gt.masks.size());
  for (std::size_t f = 0; f < gt.masks.size(); ++f) {
    const auto& g = gt.masks[f];
    if (g.rows() != r.height || g.cols() != r.width) {
      throw DataError("ground-truth mask " + std::to_string(f) + " differs from the frame size");
    }
    truth[f] = (g.array() != 0).count();
    if (f / static_cast<std::size_t>(r.cube.t) >= r.slabs.size()) continue;
    auto& ct = cube_truth[f];
    ct.resize(per_slab);
    for (int row = 0; row < r.rows; ++row)
      for (int col = 0; col < r.cols; ++col)
        ct[static_cast<std::size_t>(row * r.cols + col)] =
            (g.block(row * r.cube.h, col * r.cube.w, r.cube.h, r.cube.w).array() != 0).count();
  }

  std::vector<std::vector<PixelCounts>> out(alphas.size(),
                                            std::vector<PixelCounts>(gt.masks.size()));
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (std::size_t f = 0; f < gt.masks.size(); ++f) {
      PixelCounts& c = out[a][f];
      c.truth = truth[f];
      if (cube_truth[f].empty()) continue;
      const auto& cubes = r.slabs[f / static_cast<std::size_t>(r.cube.t)].cubes;
      for (std::size_t k = 0; k < per_slab; ++k) {
        if (cubes[k].fused.ratio > alphas[a]) {
          c.detected += area;
          c.overlap += cube_truth[f][k];
        }
      }
    }
  }
  return out;
}

std::vector<double> default_alpha_sweep(const DetectionResult& r, int max_points) {
  std::vector<double> ratios;
  for (const auto& s : r.slabs)
    for (const auto& c : s.cubes)
      if (c.fused.ratio > 0.0 && std::isfinite(c.fused.ratio)) ratios.push_back(c.fused.ratio);
  std::sort(ratios.begin(), ratios.end());
  ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());

  std::vector<double> sweep;
  const auto n = ratios.size();
  const auto limit = static_cast<std::size_t>(std::max(max_points, 10));
  if (n > limit) {
    for (std::size_t i = 0; i < limit; ++i) sweep.push_back(ratios[i * (n - 1) / (limit - 1)]);
  } else {
    sweep = ratios;
  }
  const double top = n ? ratios.back() : 1.0;
  if (sweep.size() < 10) {
    for (int i = 1; i <= 10; ++i) sweep.push_back(top * i / 10.0);
  }
  std::sort(sweep.begin(), sweep.end());
  sweep.erase(std::unique(sweep.begin(), sweep.end()), sweep.end());
  return sweep;
}

RocCurve roc(const std::vector<std::vector<PixelCounts>>& counts, std::span<const double> alphas,
             Measure m, double beta) {
  if (alphas.empty()) throw ConfigError("roc: empty alpha sweep");
  if (counts.size() != alphas.size()) throw ConfigError("roc: one count set per alpha expected");
  constexpr double kAnchor = std::numeric_limits<double>::quiet_NaN();
  RocCurve c;
  c.points.push_back({kAnchor, 0.0, 0.0});
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    Confusion conf;
    for (const auto& frame : counts[a]) conf.add(judge(frame, m, beta));
    c.points.push_back({alphas[a], conf.fpr(), conf.tpr()});
  }
  c.points.push_back({kAnchor, 1.0, 1.0});
  return c;
}

double eer(const RocCurve& c) {
  if (c.points.size() < 2) throw DataError("eer: curve needs at least two points");
  const auto pts = sorted_points(c);
  if (pts.front().fpr == pts.back().fpr && pts.front().tpr == pts.back().tpr) {
    throw DataError("eer: degenerate curve");
  }
  // g = FPR - (1 - TPR) is non-decreasing along a sorted ROC.
  auto g = [](const RocPoint& p) { return p.fpr + p.tpr - 1.0; };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double gi = g(pts[i]);
    if (gi == 0.0) return pts[i].fpr;
    if (i + 1 < pts.size()) {
      const double gj = g(pts[i + 1]);
      if (gi < 0.0 && gj > 0.0) {
        const double t = gi / (gi - gj);
        return pts[i].fpr + t * (pts[i + 1].fpr - pts[i].fpr);
      }
    }
  }
  // No crossing: the curve stays on one side of the EER line.
  return g(pts.back()) < 0.0 ? pts.back().fpr : pts.front().fpr;
}

double auc(const RocCurve& c) {
  if (c.points.size() < 2) throw DataError("auc: curve needs at least two points");
  auto pts = sorted_points(c);
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) / 2.0;
  }
  return area;
}

}  // namespace vad
