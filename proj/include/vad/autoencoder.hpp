#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "vad/video.hpp"

namespace vad {

enum class FeatureMode {
  Linear,   ///< y = W1·z
  Sigmoid,  ///< y = sigmoid(W1·z + b1)
};

struct AEHyper {
  int hidden = 1000;
  double rho = 0.05;
  double beta = 3.0;
  double lambda = 3e-3;
  double learning_rate = 1e-3;
  int batch = 64;
  int epochs = 30;
  std::uint64_t seed = 1;
  FeatureMode feature_mode = FeatureMode::Linear;

  void validate() const;
};

/// Per-dimension z-scoring fitted on training patches.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;

  template <typename Derived>
  Eigen::VectorXd apply(const Eigen::MatrixBase<Derived>& x) const {
    return ((x.array() - mean.array()) / stddev.array()).matrix();
  }
  Eigen::MatrixXd apply_columns(const Eigen::MatrixXd& columns) const;
};

inline constexpr double kStddevFloor = 1e-8;

/// Fits mean and population standard deviation over patch columns (D×n).
Standardizer standardize_fit(const Eigen::MatrixXd& patches);

struct AEModel {
  Eigen::MatrixXd w1;  // s×D
  Eigen::MatrixXd w2;  // D×s
  Eigen::VectorXd b1;  // s
  Eigen::VectorXd b2;  // D
  Standardizer standardizer;
  AEHyper hyper;
  CubeDims patch_dims;
  std::vector<double> loss_curve;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  void validate() const;
};

struct Activations {
  Eigen::VectorXd hidden;
  Eigen::VectorXd reconstruction;
};

/// One standardized input through the network; the output layer is linear.
Activations forward(const AEModel& m, const Eigen::VectorXd& x);

/// Reconstruction error + weight decay + KL sparsity over standardized
/// columns of `batch`. Hidden activation means are taken over the batch.
double loss(const AEModel& m, const Eigen::MatrixXd& batch, const AEHyper& h);

struct AEGradients {
  Eigen::MatrixXd w1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b1;
  Eigen::VectorXd b2;
};

AEGradients gradients(const AEModel& m, const Eigen::MatrixXd& batch, const AEHyper& h);

double kl_divergence(double rho, double rho_hat);

/// Randomly initialized, untrained network for `standardizer`'s dimension.
AEModel init_model(const Standardizer& standardizer, const AEHyper& h, const CubeDims& dims);

/// Standardizes raw patch columns (D×n) and runs seeded minibatch SGD.
/// The mean minibatch loss of every epoch is appended to `loss_curve`.
AEModel train(const Eigen::MatrixXd& patches, const AEHyper& h, const CubeDims& dims);

/// Global feature of one raw (unstandardized) rasterized patch.
Eigen::VectorXd encode(const AEModel& m, const Eigen::VectorXd& x_raw);

/// Mean of the standardized sub-patch vectors of a large cube.
Eigen::VectorXd pooled_standardized(const AEModel& m, const Cube& big);

/// Mean-pooled global feature over the non-overlapping sub-patches of `big`.
Eigen::VectorXd encode_pooled(const AEModel& m, const Cube& big);

/// encode_pooled over many cubes; columns follow `cubes` order.
Eigen::MatrixXd encode_pooled_batch(const AEModel& m, const std::vector<Cube>& cubes);

}  // namespace vad
