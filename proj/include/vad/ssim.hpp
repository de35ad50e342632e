#pragma once

#include <algorithm>

#include <Eigen/Core>

#include "vad/errors.hpp"
#include "vad/video.hpp"

namespace vad {

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  /// 0 evaluates one global window over the whole patch; n > 0 averages
  /// SSIM over every n×n sliding window (stride 1).
  int window = 0;

  double c1() const { return (k1 * dynamic_range) * (k1 * dynamic_range); }
  double c2() const { return (k2 * dynamic_range) * (k2 * dynamic_range); }
  void validate() const;
};

namespace detail {

template <typename DerivedA, typename DerivedB>
double ssim_window(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                   double c1, double c2) {
  using Scalar = typename DerivedA::Scalar;
  const auto n = static_cast<Scalar>(a.size());
  const Scalar mean_a = a.sum() / n;
  const Scalar mean_b = b.sum() / n;
  const auto da = (a.array() - mean_a).eval();
  const auto db = (b.array() - mean_b).eval();
  const Scalar var_a = (da * da).sum() / n;
  const Scalar var_b = (db * db).sum() / n;
  const Scalar cov = (da * db).sum() / n;
  const Scalar num = (2 * mean_a * mean_b + c1) * (2 * cov + c2);
  const Scalar den = (mean_a * mean_a + mean_b * mean_b + c1) * (var_a + var_b + c2);
  return std::clamp(static_cast<double>(num / den), -1.0, 1.0);
}

}  // namespace detail

/// Structural similarity of two equally sized 2-D patches.
template <typename DerivedA, typename DerivedB>
double ssim_frame(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
                  const SsimParams& p = {}) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ConfigError("ssim: patch dimensions differ");
  }
  if (p.window <= 0 || (p.window >= a.rows() && p.window >= a.cols())) {
    return detail::ssim_window(a, b, p.c1(), p.c2());
  }
  const Eigen::Index wr = std::min<Eigen::Index>(p.window, a.rows());
  const Eigen::Index wc = std::min<Eigen::Index>(p.window, a.cols());
  double total = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index r = 0; r + wr <= a.rows(); ++r) {
    for (Eigen::Index c = 0; c + wc <= a.cols(); ++c) {
      total += detail::ssim_window(a.block(r, c, wr, wc), b.block(r, c, wr, wc), p.c1(), p.c2());
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

/// Mean of per-frame SSIM over the temporal extent of two equal cubes.
double ssim_cube(const Cube& a, const Cube& b, const SsimParams& p = {});

}  // namespace vad
