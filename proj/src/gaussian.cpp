#include "vad/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace vad {

std::string_view to_string(DescriptorLayout layout) {
  return layout == DescriptorLayout::Global ? "global" : "local";
}

GaussianModel make_gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance, double epsilon,
                            DescriptorLayout layout) {
  const auto n = mean.size();
  if (n == 0 || covariance.rows() != n || covariance.cols() != n) {
    throw ConfigError("gaussian: mean and covariance shapes disagree");
  }
  if (!mean.allFinite() || !covariance.allFinite() || !std::isfinite(epsilon) || epsilon < 0) {
    throw NumericError("gaussian: non-finite moments or regularizer");
  }
  GaussianModel m;
  m.layout = layout;
  m.epsilon = epsilon;
  m.mean = std::move(mean);
  m.covariance = std::move(covariance);
  // The eigenbasis keeps near-null directions of rank-deficient covariances
  // from contaminating the well-conditioned ones.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.covariance);
  if (eig.info() != Eigen::Success) throw NumericError("gaussian: eigendecomposition failed");
  const Eigen::VectorXd shifted = eig.eigenvalues().cwiseMax(0.0).array() + epsilon;
  if ((shifted.array() <= 0.0).any()) {
    throw NumericError("gaussian: regularized covariance is not positive definite");
  }
  const Eigen::MatrixXd& basis = eig.eigenvectors();
  m.precision = basis * shifted.cwiseInverse().asDiagonal() * basis.transpose();
  m.precision = 0.5 * (m.precision + m.precision.transpose()).eval();
  if (!m.precision.allFinite()) throw NumericError("gaussian: non-finite precision matrix");
  return m;
}

GaussianModel fit_gaussian(const Eigen::MatrixXd& descriptors, double relative_epsilon,
                           DescriptorLayout layout) {
  const auto dim = descriptors.rows();
  const auto n = descriptors.cols();
  if (dim == 0) throw DataError("gaussian: empty descriptors");
  if (n < dim + 1) {
    throw DataError("gaussian: " + std::to_string(n) + " samples are too few for dimension " +
                    std::to_string(dim) + "; need at least " + std::to_string(dim + 1));
  }
  if (!descriptors.allFinite()) throw NumericError("gaussian: non-finite descriptors");
  if (!(relative_epsilon >= 0)) throw ConfigError("gaussian: epsilon must be >= 0");
  Eigen::VectorXd mean = descriptors.rowwise().mean();
  const Eigen::MatrixXd centered = descriptors.colwise() - mean;
  Eigen::MatrixXd cov = (centered * centered.transpose()) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose()).eval();
  const double trace = cov.trace();
  const double epsilon =
      trace > 0 ? relative_epsilon * trace / static_cast<double>(dim) : relative_epsilon;
  return make_gaussian(std::move(mean), std::move(cov), epsilon, layout);
}

Eigen::VectorXd mahalanobis_columns(const GaussianModel& m, const Eigen::MatrixXd& descriptors) {
  if (descriptors.rows() != m.dim()) {
    throw ConfigError("mahalanobis: descriptor length " + std::to_string(descriptors.rows()) +
                      " does not match model dimension " + std::to_string(m.dim()));
  }
  const Eigen::MatrixXd centered = descriptors.colwise() - m.mean;
  const Eigen::MatrixXd projected = m.precision * centered;
  return (centered.array() * projected.array()).colwise().sum().transpose().max(0.0).matrix();
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DataError("percentile of an empty set");
  if (!(p > 0.0 && p <= 100.0)) throw ConfigError("percentile must lie in (0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double calibrate_threshold(GaussianModel& m, const Eigen::MatrixXd& train_descriptors, double p) {
  if (train_descriptors.cols() == 0) throw DataError("threshold calibration: no training data");
  const Eigen::VectorXd scores = mahalanobis_columns(m, train_descriptors);
  const double t = percentile(std::vector<double>(scores.begin(), scores.end()), p);
  // A zero threshold (degenerate training data) would make score ratios undefined.
  m.threshold = std::max(t, 1e-12);
  return *m.threshold;
}

PatchLabel classify_score(const GaussianModel& m, double score, double alpha) {
  if (!m.threshold) throw ConfigError("classifier is not calibrated");
  PatchLabel out;
  out.score = score;
  out.ratio = score / *m.threshold;
  out.label = out.ratio > alpha ? Label::Anomaly : Label::Normal;
  return out;
}

std::string_view to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::ProseAnd:
      return "prose_and";
    case FusionMode::Eq4Or:
      return "eq4_or";
    case FusionMode::GlobalOnly:
      return "global_only";
  }
  return "?";
}

FusionMode parse_fusion_mode(std::string_view text) {
  if (text == "prose_and" || text == "and") return FusionMode::ProseAnd;
  if (text == "eq4_or" || text == "or") return FusionMode::Eq4Or;
  if (text == "global_only" || text == "global") return FusionMode::GlobalOnly;
  throw ConfigError("unknown fusion mode '" + std::string(text) + "'");
}

PatchLabel fuse(const PatchLabel& global, const PatchLabel& local, FusionMode mode) {
  const bool g = global.label == Label::Anomaly;
  const bool l = local.label == Label::Anomaly;
  PatchLabel out;
  switch (mode) {
    case FusionMode::ProseAnd:
      out.label = g && l ? Label::Anomaly : Label::Normal;
      out.ratio = std::min(global.ratio, local.ratio);
      break;
    case FusionMode::Eq4Or:
      out.label = g || l ? Label::Anomaly : Label::Normal;
      out.ratio = std::max(global.ratio, local.ratio);
      break;
    case FusionMode::GlobalOnly:
      out.label = global.label;
      out.ratio = global.ratio;
      break;
  }
  out.score = out.ratio;
  return out;
}

}  // namespace vad
