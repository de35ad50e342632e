#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vad/errors.hpp"

namespace vad {

enum class DescriptorLayout { Global, Local };

std::string_view to_string(DescriptorLayout layout);

/// Gaussian model of normal descriptors. Only the quadratic form of the
/// regularized inverse covariance is ever evaluated; no densities.
struct GaussianModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd precision;  ///< (covariance + epsilon·I)⁻¹
  double epsilon = 0.0;       ///< absolute regularizer actually applied
  std::optional<double> threshold;
  DescriptorLayout layout = DescriptorLayout::Global;

  int dim() const { return static_cast<int>(mean.size()); }
};

inline constexpr double kDefaultRelativeEpsilon = 1e-6;
inline constexpr double kDefaultPercentile = 99.0;

/// Builds a model from explicit moments with absolute regularizer `epsilon`.
GaussianModel make_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double epsilon,
                            DescriptorLayout layout = DescriptorLayout::Global);

/// Sample mean and unbiased covariance of descriptor columns (dim×n).
/// The regularizer is relative_epsilon·trace(Σ)/dim, or relative_epsilon
/// itself when the covariance vanishes.
GaussianModel fit_gaussian(const Eigen::MatrixXd& descriptors,
                           double relative_epsilon = kDefaultRelativeEpsilon,
                           DescriptorLayout layout = DescriptorLayout::Global);

/// Squared Mahalanobis distance (x-μ)ᵀ Σ⁻¹ (x-μ).
template <typename Derived>
double mahalanobis(const GaussianModel& m, const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != m.dim()) {
    throw ConfigError("mahalanobis: descriptor length " + std::to_string(x.size()) +
                      " does not match model dimension " + std::to_string(m.dim()));
  }
  const Eigen::VectorXd d = x - m.mean;
  return std::max(0.0, d.dot(m.precision * d));
}

/// Scores of all descriptor columns.
Eigen::VectorXd mahalanobis_columns(const GaussianModel& m, const Eigen::MatrixXd& descriptors);

/// Linearly interpolated percentile, p in (0, 100].
double percentile(std::vector<double> values, double p);

/// Sets and returns the threshold as the `p`th percentile of training scores.
double calibrate_threshold(GaussianModel& m, const Eigen::MatrixXd& train_descriptors,
                           double p = kDefaultPercentile);

enum class Label { Normal, Anomaly };

struct PatchLabel {
  Label label = Label::Normal;
  double score = 0.0;  ///< raw f(x)
  double ratio = 0.0;  ///< f(x) / threshold, used for ROC sweeps
};

/// Anomaly iff score / threshold > alpha.
PatchLabel classify_score(const GaussianModel& m, double score, double alpha = 1.0);

template <typename Derived>
PatchLabel classify_patch(const GaussianModel& m, const Eigen::MatrixBase<Derived>& x,
                          double alpha = 1.0) {
  return classify_score(m, mahalanobis(m, x), alpha);
}

enum class FusionMode {
  ProseAnd,    ///< anomaly only if both views flag it
  Eq4Or,       ///< anomaly if either view flags it
  GlobalOnly,  ///< the local view is ignored
};

std::string_view to_string(FusionMode mode);
FusionMode parse_fusion_mode(std::string_view text);

PatchLabel fuse(const PatchLabel& global, const PatchLabel& local, FusionMode mode);

}  // namespace vad
