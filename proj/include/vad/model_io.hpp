#pragma once

#include <filesystem>

#include "vad/autoencoder.hpp"
#include "vad/gaussian.hpp"
#include "vad/video.hpp"

namespace vad {

/// Rasterization-order tag stored in auto-encoder files.
inline constexpr std::string_view kRasterOrderTag = "t*(w*h)+row*w+col";

// Versioned little-endian binary containers. Doubles are stored verbatim, so
// a write/read cycle reproduces every parameter bit for bit.
void write_autoencoder(const std::filesystem::path& path, const AEModel& m);
AEModel read_autoencoder(const std::filesystem::path& path);

/// Classifier file: the model plus the fusion mode and the cube size it was
/// trained on.
struct ClassifierFile {
  GaussianModel model;
  FusionMode fusion = FusionMode::ProseAnd;
  CubeDims cube;
};

void write_classifier(const std::filesystem::path& path, const ClassifierFile& c);
ClassifierFile read_classifier(const std::filesystem::path& path);

}  // namespace vad
