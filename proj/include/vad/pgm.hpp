#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Core>

namespace vad {

using Frame = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Reads P2/P5 graymaps and P3/P6 pixmaps. Color is reduced to luminance with
// weights 0.299/0.587/0.114; samples with maxval > 255 are rescaled to 8 bit.
Frame read_pnm(const std::filesystem::path& path);

// Writes a binary (P5) graymap with maxval 255.
void write_pgm(const std::filesystem::path& path, const Frame& frame);

}  // namespace vad
