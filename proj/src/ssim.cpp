#include "vad/ssim.hpp"

namespace vad {

void SsimParams::validate() const {
  if (!(k1 > 0) || !(k2 > 0) || !(dynamic_range > 0)) {
    throw ConfigError("ssim: k1, k2 and the dynamic range must be positive");
  }
  if (window < 0) throw ConfigError("ssim: window must be >= 0");
}

double ssim_cube(const Cube& a, const Cube& b, const SsimParams& p) {
  if (a.dims() != b.dims()) {
    throw ConfigError("ssim: cube dimensions differ (" + to_string(a.dims()) + " vs " +
                      to_string(b.dims()) + ")");
  }
  double total = 0.0;
  for (int k = 0; k < a.dims().t; ++k) total += ssim_frame(a.frame(k), b.frame(k), p);
  return total / a.dims().t;
}

}  // namespace vad
