#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "vad/ssim.hpp"
#include "vad/video.hpp"

namespace vad {

inline constexpr int kSpatialNeighbors = 8;
inline constexpr int kNeighborSimilarities = kSpatialNeighbors + 1;

/// Spatial neighbor offsets (row, col), clockwise from the top-left cell.
inline constexpr std::array<std::array<int, 2>, kSpatialNeighbors> kNeighborOffsets{{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}, {0, -1}}};

/// SSIM of a cube against its neighborhood and across its own frames.
///
/// neighbors[0..7] are the spatial neighbors in the same slab (clockwise from
/// top-left, replicate padding at the grid border); neighbors[8] is the
/// co-located cube of the previous slab (the cube itself in slab 0).
/// intra[k] compares frames k and k+1 of the cube.
struct LocalDescriptor {
  Eigen::Matrix<double, kNeighborSimilarities, 1> neighbors;
  Eigen::VectorXd intra;

  /// Concatenation [neighbors, intra]; length 9 + (t - 1).
  Eigen::VectorXd vector() const;
};

inline int local_descriptor_length(int cube_t) { return kNeighborSimilarities + cube_t - 1; }

Eigen::Matrix<double, kNeighborSimilarities, 1> neighbor_similarities(const CubeGrid& g,
                                                                      const CubeIndex& idx,
                                                                      const SsimParams& p = {});

Eigen::VectorXd intra_similarities(const Cube& c, const SsimParams& p = {});

LocalDescriptor local_descriptor(const CubeGrid& g, const CubeIndex& idx,
                                 const SsimParams& p = {});

/// Descriptors of every cube in one slab as columns (row-major cube order).
/// Each cube is materialized once and symmetric pairs are evaluated once.
Eigen::MatrixXd slab_descriptors(const CubeGrid& g, int slab, const SsimParams& p = {});

}  // namespace vad
