#include "vad/video.hpp"

#include <fnmatch.h>

#include <algorithm>

#include "vad/errors.hpp"

namespace vad {

FrameVolume::FrameVolume(std::vector<Frame> frames) : frames_(std::move(frames)) {
  if (frames_.empty()) throw DataError("frame volume needs at least one frame");
  const auto rows = frames_.front().rows();
  const auto cols = frames_.front().cols();
  if (rows == 0 || cols == 0) throw DataError("frame volume has empty frames");
  for (const auto& f : frames_) {
    if (f.rows() != rows || f.cols() != cols) {
      throw LoadError(LoadError::Kind::DimensionMismatch,
                      "frames differ in size: " + std::to_string(cols) + "x" + std::to_string(rows) +
                          " vs " + std::to_string(f.cols()) + "x" + std::to_string(f.rows()));
    }
  }
}

std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir,
                                               std::string_view pattern) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw LoadError(LoadError::Kind::MissingDirectory, "no such directory: " + dir.string());
  }
  const std::string glob(pattern);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (::fnmatch(glob.c_str(), entry.path().filename().c_str(), 0) == 0) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

FrameVolume load_frame_sequence(const std::filesystem::path& dir, std::string_view pattern) {
  const auto files = list_frames(dir, pattern);
  if (files.empty()) {
    throw LoadError(LoadError::Kind::NoMatchingFiles,
                    "no files matching '" + std::string(pattern) + "' in " + dir.string());
  }
  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (const auto& f : files) frames.push_back(read_pnm(f));
  return FrameVolume(std::move(frames));
}

std::string to_string(const CubeDims& d) {
  return std::to_string(d.w) + "x" + std::to_string(d.h) + "x" + std::to_string(d.t);
}

Cube::Cube(CubeDims dims, CubeOrigin origin, Eigen::VectorXd data)
    : dims_(dims), origin_(origin), data_(std::move(data)) {
  if (data_.size() != dims_.size()) {
    throw ConfigError("cube data length " + std::to_string(data_.size()) + " does not match " +
                      to_string(dims_));
  }
}

Cube reshape(const Eigen::Ref<const Eigen::VectorXd>& v, const CubeDims& dims,
             const CubeOrigin& origin) {
  return Cube(dims, origin, v);
}

CubeGrid::CubeGrid(std::shared_ptr<const FrameVolume> volume, CubeDims dims)
    : volume_(std::move(volume)), dims_(dims) {
  if (!volume_) throw ConfigError("cube grid needs a volume");
  if (dims_.w < 1 || dims_.h < 1 || dims_.t < 1) {
    throw ConfigError("cube dimensions must be positive: " + to_string(dims_));
  }
  const auto& v = *volume_;
  if (dims_.w > v.width() || dims_.h > v.height() || dims_.t > v.frame_count()) {
    throw ConfigError("cube " + to_string(dims_) + " exceeds volume " + std::to_string(v.width()) +
                      "x" + std::to_string(v.height()) + "x" + std::to_string(v.frame_count()));
  }
  rows_ = v.height() / dims_.h;
  cols_ = v.width() / dims_.w;
  slabs_ = v.frame_count() / dims_.t;
  const int crop_x = v.width() - cols_ * dims_.w;
  const int crop_y = v.height() - rows_ * dims_.h;
  const int crop_t = v.frame_count() - slabs_ * dims_.t;
  if (crop_x || crop_y || crop_t) {
    crop_warning_ = "cropped " + std::to_string(crop_x) + " columns, " + std::to_string(crop_y) +
                    " rows, " + std::to_string(crop_t) + " frames";
  }
}

bool CubeGrid::contains(const CubeIndex& idx) const {
  return idx.row >= 0 && idx.row < rows_ && idx.col >= 0 && idx.col < cols_ && idx.slab >= 0 &&
         idx.slab < slabs_;
}

CubeOrigin CubeGrid::origin(const CubeIndex& idx) const {
  return {idx.col * dims_.w, idx.row * dims_.h, idx.slab * dims_.t};
}

Cube CubeGrid::cube(const CubeIndex& idx) const {
  if (!contains(idx)) {
    throw ConfigError("cube index (" + std::to_string(idx.row) + "," + std::to_string(idx.col) +
                      "," + std::to_string(idx.slab) + ") out of range");
  }
  const CubeOrigin o = origin(idx);
  Eigen::VectorXd data(dims_.size());
  const Eigen::Index plane = static_cast<Eigen::Index>(dims_.w) * dims_.h;
  for (int k = 0; k < dims_.t; ++k) {
    Eigen::Map<RowMatrixXd>(data.data() + k * plane, dims_.h, dims_.w) =
        volume_->frame(o.t + k).block(o.y, o.x, dims_.h, dims_.w).cast<double>();
  }
  return Cube(dims_, o, std::move(data));
}

CubeGrid build_grid(std::shared_ptr<const FrameVolume> volume, const CubeDims& dims) {
  return CubeGrid(std::move(volume), dims);
}

std::vector<Cube> subdivide(const Cube& c, const CubeDims& sub) {
  const auto& d = c.dims();
  if (sub.w < 1 || sub.h < 1 || sub.t != d.t || d.w % sub.w != 0 || d.h % sub.h != 0) {
    throw ConfigError("cannot subdivide " + to_string(d) + " into " + to_string(sub));
  }
  const int nx = d.w / sub.w;
  const int ny = d.h / sub.h;
  std::vector<Cube> out;
  out.reserve(static_cast<std::size_t>(nx) * ny);
  const Eigen::Index plane = static_cast<Eigen::Index>(sub.w) * sub.h;
  for (int by = 0; by < ny; ++by) {
    for (int bx = 0; bx < nx; ++bx) {
      Eigen::VectorXd data(sub.size());
      for (int k = 0; k < d.t; ++k) {
        Eigen::Map<RowMatrixXd>(data.data() + k * plane, sub.h, sub.w) =
            c.frame(k).block(by * sub.h, bx * sub.w, sub.h, sub.w);
      }
      const CubeOrigin o{c.origin().x + bx * sub.w, c.origin().y + by * sub.h, c.origin().t};
      out.emplace_back(sub, o, std::move(data));
    }
  }
  return out;
}

}  // namespace vad
