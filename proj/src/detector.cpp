#include "vad/detector.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

#include "vad/errors.hpp"
#include "vad/local_descriptor.hpp"

namespace vad {
namespace {

std::vector<Cube> slab_cubes(const CubeGrid& g, int slab) {
  std::vector<Cube> cubes;
  cubes.reserve(static_cast<std::size_t>(g.cubes_per_slab()));
  for (int r = 0; r < g.rows(); ++r)
    for (int c = 0; c < g.cols(); ++c) cubes.push_back(g.cube({r, c, slab}));
  return cubes;
}

void check_models(const DetectorModels& models, const DetectorConfig& cfg) {
  if (models.ae.patch_dims != cfg.small) {
    throw ConfigError("auto-encoder was trained on " + to_string(models.ae.patch_dims) +
                      " patches, config expects " + to_string(cfg.small));
  }
  if (models.big != cfg.big) {
    throw ConfigError("classifiers were trained on " + to_string(models.big) +
                      " cubes, config expects " + to_string(cfg.big));
  }
  if (models.global.layout != DescriptorLayout::Global ||
      models.global.dim() != models.ae.hidden_dim()) {
    throw ConfigError("global classifier does not match the auto-encoder feature size");
  }
  if (!models.global.threshold) throw ConfigError("global classifier is not calibrated");
  if (cfg.fusion != FusionMode::GlobalOnly) {
    if (!models.local) throw ConfigError("fusion mode needs a local classifier");
    if (models.local->layout != DescriptorLayout::Local ||
        models.local->dim() != local_descriptor_length(cfg.big.t)) {
      throw ConfigError("local classifier does not match the descriptor layout for " +
                        to_string(cfg.big));
    }
    if (!models.local->threshold) throw ConfigError("local classifier is not calibrated");
  }
}

}  // namespace

void DetectorConfig::validate() const {
  ae.validate();
  ssim.validate();
  if (small.w < 1 || small.h < 1 || small.t < 1 || big.w < 1 || big.h < 1) {
    throw ConfigError("cube dimensions must be positive");
  }
  if (big.t != small.t) throw ConfigError("big and small cubes must have equal temporal depth");
  if (big.t < 2) throw ConfigError("cubes need at least two frames for intra similarities");
  if (big.w % small.w != 0 || big.h % small.h != 0) {
    throw ConfigError("big cube " + to_string(big) + " is not divisible by " + to_string(small));
  }
  auto valid_percentile = [](double p) { return p > 0.0 && p <= 100.0; };
  if (!valid_percentile(global_percentile) || !valid_percentile(local_percentile)) {
    throw ConfigError("percentiles must lie in (0, 100]");
  }
  if (!(relative_epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (ae_max_patches < ae.batch) throw ConfigError("ae_max_patches must be at least one batch");
}

DetectorModels train_detector(std::span<const FrameVolume> normal_videos,
                              const DetectorConfig& cfg) {
  cfg.validate();
  if (normal_videos.empty()) throw DataError("training needs at least one video");

  std::vector<CubeGrid> small_grids;
  std::vector<CubeGrid> big_grids;
  std::vector<std::pair<int, CubeIndex>> candidates;
  for (std::size_t v = 0; v < normal_videos.size(); ++v) {
    const auto& g = small_grids.emplace_back(borrow(normal_videos[v]), cfg.small);
    big_grids.emplace_back(borrow(normal_videos[v]), cfg.big);
    for (int s = 0; s < g.slabs(); ++s)
      for (int r = 0; r < g.rows(); ++r)
        for (int c = 0; c < g.cols(); ++c) candidates.push_back({static_cast<int>(v), {r, c, s}});
  }

  // Seeded subsample of small patches, gathered in storage order.
  std::mt19937_64 rng(cfg.ae.seed + 0x51ed27);
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(order.size(), static_cast<std::size_t>(cfg.ae_max_patches)));
  std::sort(order.begin(), order.end());
  Eigen::MatrixXd patches(cfg.small.size(), static_cast<Eigen::Index>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& [v, idx] = candidates[order[i]];
    patches.col(static_cast<Eigen::Index>(i)) = small_grids[v].cube(idx).data();
  }

  DetectorModels models;
  models.big = cfg.big;
  models.ae = train(patches, cfg.ae, cfg.small);

  Eigen::Index total = 0;
  for (const auto& g : big_grids) total += static_cast<Eigen::Index>(g.slabs()) * g.cubes_per_slab();
  const Eigen::Index needed = models.ae.hidden_dim() + 1;
  if (total < needed) {
    throw DataError("training videos yield " + std::to_string(total) + " cubes of " +
                    to_string(cfg.big) + "; the global classifier needs at least " +
                    std::to_string(needed));
  }

  Eigen::MatrixXd global(models.ae.hidden_dim(), total);
  Eigen::MatrixXd local(local_descriptor_length(cfg.big.t), total);
  Eigen::Index at = 0;
  for (const auto& g : big_grids) {
    for (int s = 0; s < g.slabs(); ++s) {
      const Eigen::Index n = g.cubes_per_slab();
      global.middleCols(at, n) = encode_pooled_batch(models.ae, slab_cubes(g, s));
      local.middleCols(at, n) = slab_descriptors(g, s, cfg.ssim);
      at += n;
    }
  }

  models.global = fit_gaussian(global, cfg.relative_epsilon, DescriptorLayout::Global);
  calibrate_threshold(models.global, global, cfg.global_percentile);
  GaussianModel local_model = fit_gaussian(local, cfg.relative_epsilon, DescriptorLayout::Local);
  calibrate_threshold(local_model, local, cfg.local_percentile);
  models.local = std::move(local_model);
  return models;
}

StreamingDetector::StreamingDetector(const DetectorModels& models, const DetectorConfig& cfg,
                                     int width, int height)
    : models_(models), cfg_(cfg), width_(width), height_(height) {
  cfg_.validate();
  check_models(models_, cfg_);
  if (cfg_.big.w > width || cfg_.big.h > height) {
    throw ConfigError("cube " + to_string(cfg_.big) + " exceeds the " + std::to_string(width) +
                      "x" + std::to_string(height) + " frame");
  }
  rows_ = height / cfg_.big.h;
  cols_ = width / cfg_.big.w;
}

std::optional<SlabResult> StreamingDetector::push(const Frame& frame) {
  if (frame.cols() != width_ || frame.rows() != height_) {
    throw DataError("frame size changed mid-stream");
  }
  current_.push_back(frame);
  if (static_cast<int>(current_.size()) < cfg_.big.t) return std::nullopt;
  SlabResult result = score_slab();
  previous_ = std::move(current_);
  current_.clear();
  return result;
}

SlabResult StreamingDetector::score_slab() {
  std::vector<Frame> frames;
  frames.reserve(previous_.size() + current_.size());
  frames.insert(frames.end(), previous_.begin(), previous_.end());
  frames.insert(frames.end(), current_.begin(), current_.end());
  const FrameVolume window(std::move(frames));
  const CubeGrid grid(borrow(window), cfg_.big);
  const int slab = previous_.empty() ? 0 : 1;

  const Eigen::MatrixXd features = encode_pooled_batch(models_.ae, slab_cubes(grid, slab));
  const Eigen::VectorXd global_scores = mahalanobis_columns(models_.global, features);
  Eigen::VectorXd local_scores;
  if (cfg_.fusion != FusionMode::GlobalOnly) {
    local_scores = mahalanobis_columns(*models_.local, slab_descriptors(grid, slab, cfg_.ssim));
  }

  SlabResult out;
  out.slab = next_slab_++;
  out.cubes.resize(static_cast<std::size_t>(grid.cubes_per_slab()));
  for (Eigen::Index i = 0; i < global_scores.size(); ++i) {
    auto& v = out.cubes[static_cast<std::size_t>(i)];
    v.global = classify_score(models_.global, global_scores[i], cfg_.alpha);
    if (cfg_.fusion != FusionMode::GlobalOnly) {
      v.local = classify_score(*models_.local, local_scores[i], cfg_.alpha);
    }
    v.fused = fuse(v.global, v.local, cfg_.fusion);
  }
  return out;
}

Frame render_mask(const DetectionResult& r, int frame, double alpha) {
  Frame mask = Frame::Zero(r.height, r.width);
  const int slab = frame / r.cube.t;
  if (slab >= static_cast<int>(r.slabs.size())) return mask;
  const auto& cubes = r.slabs[static_cast<std::size_t>(slab)].cubes;
  for (int row = 0; row < r.rows; ++row) {
    for (int col = 0; col < r.cols; ++col) {
      if (cubes[static_cast<std::size_t>(row * r.cols + col)].fused.ratio > alpha) {
        mask.block(row * r.cube.h, col * r.cube.w, r.cube.h, r.cube.w).setConstant(255);
      }
    }
  }
  return mask;
}

DetectionResult detect(const DetectorModels& models, const FrameVolume& test,
                       const DetectorConfig& cfg) {
  StreamingDetector stream(models, cfg, test.width(), test.height());
  DetectionResult r;
  r.cube = cfg.big;
  r.width = test.width();
  r.height = test.height();
  r.frame_count = test.frame_count();
  r.rows = stream.rows();
  r.cols = stream.cols();
  r.fusion = cfg.fusion;
  r.alpha = cfg.alpha;

  auto start = std::chrono::steady_clock::now();
  for (const auto& frame : test.frames()) {
    if (auto slab = stream.push(frame)) {
      const auto now = std::chrono::steady_clock::now();
      r.slab_seconds.push_back(std::chrono::duration<double>(now - start).count());
      r.slabs.push_back(std::move(*slab));
      start = std::chrono::steady_clock::now();
    }
  }

  r.masks.reserve(static_cast<std::size_t>(r.frame_count));
  r.frame_scores.assign(static_cast<std::size_t>(r.frame_count), 0.0);
  for (int f = 0; f < r.frame_count; ++f) {
    const auto slab = static_cast<std::size_t>(f / r.cube.t);
    if (slab < r.slabs.size()) {
      for (const auto& c : r.slabs[slab].cubes) {
        r.frame_scores[static_cast<std::size_t>(f)] =
            std::max(r.frame_scores[static_cast<std::size_t>(f)], c.fused.ratio);
      }
    }
    r.masks.push_back(render_mask(r, f, r.alpha));
  }
  return r;
}

BenchStats benchmark(const DetectorModels& models, const FrameVolume& test,
                     const DetectorConfig& cfg, int repeats) {
  if (repeats < 1) throw ConfigError("benchmark needs at least one repeat");
  BenchStats stats;
  for (int i = 0; i < repeats; ++i) {
    StreamingDetector stream(models, cfg, test.width(), test.height());
    auto start = std::chrono::steady_clock::now();
    for (const auto& frame : test.frames()) {
      if (stream.push(frame)) {
        const auto now = std::chrono::steady_clock::now();
        stats.samples.push_back(std::chrono::duration<double>(now - start).count() / cfg.big.t);
        start = now;
      }
    }
  }
  if (stats.samples.empty()) throw DataError("benchmark video is shorter than one slab");
  stats.median = percentile(stats.samples, 50.0);
  stats.p95 = percentile(stats.samples, 95.0);
  return stats;
}

}  // namespace vad
