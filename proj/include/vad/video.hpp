#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vad/pgm.hpp"

namespace vad {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Ordered stack of equally sized 8-bit grayscale frames.
class FrameVolume {
 public:
  explicit FrameVolume(std::vector<Frame> frames);

  int width() const { return static_cast<int>(frames_.front().cols()); }
  int height() const { return static_cast<int>(frames_.front().rows()); }
  int frame_count() const { return static_cast<int>(frames_.size()); }

  const Frame& frame(int t) const { return frames_[t]; }
  std::span<const Frame> frames() const { return frames_; }

 private:
  std::vector<Frame> frames_;
};

/// Non-owning handle for APIs that take shared volumes; `v` must outlive it.
inline std::shared_ptr<const FrameVolume> borrow(const FrameVolume& v) {
  return std::shared_ptr<const FrameVolume>(std::shared_ptr<const FrameVolume>{}, &v);
}

/// Sorted (lexicographic) files in `dir` whose names match the glob `pattern`.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir,
                                               std::string_view pattern = "*.pgm");

FrameVolume load_frame_sequence(const std::filesystem::path& dir,
                                std::string_view pattern = "*.pgm");

struct CubeDims {
  int w = 0;
  int h = 0;
  int t = 0;

  int size() const { return w * h * t; }
  friend bool operator==(const CubeDims&, const CubeDims&) = default;
};

std::string to_string(const CubeDims& d);

struct CubeOrigin {
  int x = 0;
  int y = 0;
  int t = 0;
  friend bool operator==(const CubeOrigin&, const CubeOrigin&) = default;
};

struct CubeIndex {
  int row = 0;
  int col = 0;
  int slab = 0;
  friend bool operator==(const CubeIndex&, const CubeIndex&) = default;
};

/// A w×h×t intensity block stored in raster order:
/// index = t·(w·h) + row·w + col.
class Cube {
 public:
  Cube(CubeDims dims, CubeOrigin origin, Eigen::VectorXd data);

  const CubeDims& dims() const { return dims_; }
  const CubeOrigin& origin() const { return origin_; }
  const Eigen::VectorXd& data() const { return data_; }

  Eigen::Map<const RowMatrixXd> frame(int k) const {
    return {data_.data() + static_cast<Eigen::Index>(k) * dims_.w * dims_.h, dims_.h, dims_.w};
  }

 private:
  CubeDims dims_;
  CubeOrigin origin_;
  Eigen::VectorXd data_;
};

inline Eigen::VectorXd rasterize(const Cube& c) { return c.data(); }

Cube reshape(const Eigen::Ref<const Eigen::VectorXd>& v, const CubeDims& dims,
             const CubeOrigin& origin = {});

/// Non-overlapping partition of a volume into equal cubes. Remainders at the
/// right, bottom, and tail are cropped. Cubes are materialized on access.
class CubeGrid {
 public:
  CubeGrid(std::shared_ptr<const FrameVolume> volume, CubeDims dims);

  const CubeDims& dims() const { return dims_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int slabs() const { return slabs_; }
  int cubes_per_slab() const { return rows_ * cols_; }
  const FrameVolume& volume() const { return *volume_; }

  bool contains(const CubeIndex& idx) const;
  CubeOrigin origin(const CubeIndex& idx) const;
  Cube cube(const CubeIndex& idx) const;

  /// Non-empty when part of the volume does not fit a whole cube.
  const std::string& crop_warning() const { return crop_warning_; }

 private:
  std::shared_ptr<const FrameVolume> volume_;
  CubeDims dims_;
  int rows_ = 0;
  int cols_ = 0;
  int slabs_ = 0;
  std::string crop_warning_;
};

CubeGrid build_grid(std::shared_ptr<const FrameVolume> volume, const CubeDims& dims);

/// Splits `c` into non-overlapping sub-cubes in row-major spatial order. The
/// sub-cubes share the parent's temporal extent, so `sub.t` must equal it.
std::vector<Cube> subdivide(const Cube& c, const CubeDims& sub);

}  // namespace vad
