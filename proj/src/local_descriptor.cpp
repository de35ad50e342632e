#include "vad/local_descriptor.hpp"

#include <algorithm>
#include <map>

namespace vad {
namespace {

CubeIndex replicate(const CubeGrid& g, int row, int col, int slab) {
  return {std::clamp(row, 0, g.rows() - 1), std::clamp(col, 0, g.cols() - 1), slab};
}

void check_index(const CubeGrid& g, const CubeIndex& idx) {
  if (!g.contains(idx)) {
    throw ConfigError("local descriptor: cube index (" + std::to_string(idx.row) + "," +
                      std::to_string(idx.col) + "," + std::to_string(idx.slab) +
                      ") out of range");
  }
}

}  // namespace

Eigen::VectorXd LocalDescriptor::vector() const {
  Eigen::VectorXd v(neighbors.size() + intra.size());
  v << neighbors, intra;
  return v;
}

Eigen::Matrix<double, kNeighborSimilarities, 1> neighbor_similarities(const CubeGrid& g,
                                                                      const CubeIndex& idx,
                                                                      const SsimParams& p) {
  check_index(g, idx);
  const Cube self = g.cube(idx);
  Eigen::Matrix<double, kNeighborSimilarities, 1> d;
  for (int i = 0; i < kSpatialNeighbors; ++i) {
    const auto [dr, dc] = kNeighborOffsets[i];
    d[i] = ssim_cube(self, g.cube(replicate(g, idx.row + dr, idx.col + dc, idx.slab)), p);
  }
  const CubeIndex behind{idx.row, idx.col, std::max(idx.slab - 1, 0)};
  d[kSpatialNeighbors] = ssim_cube(self, g.cube(behind), p);
  return d;
}

Eigen::VectorXd intra_similarities(const Cube& c, const SsimParams& p) {
  const int t = c.dims().t;
  if (t < 2) throw ConfigError("intra similarities need at least two frames per cube");
  Eigen::VectorXd out(t - 1);
  for (int k = 0; k + 1 < t; ++k) out[k] = ssim_frame(c.frame(k), c.frame(k + 1), p);
  return out;
}

LocalDescriptor local_descriptor(const CubeGrid& g, const CubeIndex& idx, const SsimParams& p) {
  check_index(g, idx);
  return {neighbor_similarities(g, idx, p), intra_similarities(g.cube(idx), p)};
}

Eigen::MatrixXd slab_descriptors(const CubeGrid& g, int slab, const SsimParams& p) {
  if (slab < 0 || slab >= g.slabs()) throw ConfigError("slab out of range");
  const int rows = g.rows();
  const int cols = g.cols();
  const int t = g.dims().t;
  if (t < 2) throw ConfigError("intra similarities need at least two frames per cube");

  std::vector<Cube> current;
  std::vector<Cube> previous;
  current.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) current.push_back(g.cube({r, c, slab}));
  if (slab > 0) {
    previous.reserve(current.size());
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) previous.push_back(g.cube({r, c, slab - 1}));
  }

  auto at = [cols](int r, int c) { return static_cast<std::size_t>(r) * cols + c; };
  std::map<std::pair<std::size_t, std::size_t>, double> pair_cache;
  auto pair_ssim = [&](std::size_t a, std::size_t b) {
    const auto key = std::minmax(a, b);
    auto it = pair_cache.find(key);
    if (it != pair_cache.end()) return it->second;
    const double v = ssim_cube(current[key.first], current[key.second], p);
    pair_cache.emplace(key, v);
    return v;
  };

  Eigen::MatrixXd out(local_descriptor_length(t), static_cast<Eigen::Index>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t self = at(r, c);
      auto col = out.col(static_cast<Eigen::Index>(self));
      for (int i = 0; i < kSpatialNeighbors; ++i) {
        const auto [dr, dc] = kNeighborOffsets[i];
        const CubeIndex n = replicate(g, r + dr, c + dc, slab);
        // ssim is exactly symmetric in floating point, so cached pairs match
        // neighbor_similarities bit for bit.
        const std::size_t other = at(n.row, n.col);
        col[i] = other == self ? ssim_cube(current[self], current[self], p)
                               : pair_ssim(self, other);
      }
      col[kSpatialNeighbors] =
          ssim_cube(current[self], slab > 0 ? previous[self] : current[self], p);
      for (int k = 0; k + 1 < t; ++k) {
        col[kNeighborSimilarities + k] =
            ssim_frame(current[self].frame(k), current[self].frame(k + 1), p);
      }
    }
  }
  return out;
}

}  // namespace vad
