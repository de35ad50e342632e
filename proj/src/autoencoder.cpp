#include "vad/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "vad/errors.hpp"

namespace vad {
namespace {

constexpr double kActivationClamp = 1e-10;

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

struct BatchPass {
  Eigen::MatrixXd hidden;          // s×m
  Eigen::MatrixXd reconstruction;  // D×m
  Eigen::VectorXd rho_hat;         // s
};

BatchPass run_batch(const AEModel& m, const Eigen::MatrixXd& batch) {
  if (batch.cols() == 0) throw DataError("autoencoder: empty batch");
  if (batch.rows() != m.input_dim()) {
    throw ConfigError("autoencoder: batch dimension " + std::to_string(batch.rows()) +
                      " does not match model input " + std::to_string(m.input_dim()));
  }
  BatchPass p;
  p.hidden = sigmoid((m.w1 * batch).colwise() + m.b1);
  p.reconstruction = (m.w2 * p.hidden).colwise() + m.b2;
  p.rho_hat = p.hidden.rowwise().mean().cwiseMax(kActivationClamp).cwiseMin(1.0 - kActivationClamp);
  return p;
}

}  // namespace

void AEHyper::validate() const {
  if (hidden < 1) throw ConfigError("autoencoder: hidden size must be >= 1");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("autoencoder: rho must lie in (0, 1)");
  if (!(beta > 0.0) || !(lambda > 0.0) || !(learning_rate > 0.0)) {
    throw ConfigError("autoencoder: beta, lambda and learning rate must be positive");
  }
  if (batch < 1 || epochs < 1) throw ConfigError("autoencoder: batch and epochs must be >= 1");
}

Eigen::MatrixXd Standardizer::apply_columns(const Eigen::MatrixXd& columns) const {
  return ((columns.colwise() - mean).array().colwise() / stddev.array()).matrix();
}

Standardizer standardize_fit(const Eigen::MatrixXd& patches) {
  if (patches.cols() < 2) throw DataError("standardization needs at least two patches");
  Standardizer s;
  s.mean = patches.rowwise().mean();
  const Eigen::MatrixXd centered = patches.colwise() - s.mean;
  s.stddev = (centered.array().square().rowwise().sum() / static_cast<double>(patches.cols()))
                 .sqrt()
                 .max(kStddevFloor)
                 .matrix();
  return s;
}

void AEModel::validate() const {
  const auto s = w1.rows();
  const auto d = w1.cols();
  if (w2.rows() != d || w2.cols() != s || b1.size() != s || b2.size() != d ||
      standardizer.mean.size() != d || standardizer.stddev.size() != d) {
    throw ConfigError("autoencoder: inconsistent parameter shapes");
  }
  if (!w1.allFinite() || !w2.allFinite() || !b1.allFinite() || !b2.allFinite() ||
      !standardizer.mean.allFinite() || !standardizer.stddev.allFinite()) {
    throw NumericError("autoencoder: non-finite parameters");
  }
  if ((standardizer.stddev.array() <= 0.0).any()) {
    throw NumericError("autoencoder: non-positive standard deviation");
  }
  if (patch_dims.size() != d) throw ConfigError("autoencoder: patch dims do not match input size");
}

Activations forward(const AEModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.input_dim()) throw ConfigError("autoencoder: input dimension mismatch");
  Activations a;
  a.hidden = sigmoid(m.w1 * x + m.b1);
  a.reconstruction = m.w2 * a.hidden + m.b2;
  return a;
}

double kl_divergence(double rho, double rho_hat) {
  return rho * std::log(rho / rho_hat) + (1.0 - rho) * std::log((1.0 - rho) / (1.0 - rho_hat));
}

double loss(const AEModel& m, const Eigen::MatrixXd& batch, const AEHyper& h) {
  const BatchPass p = run_batch(m, batch);
  const double reconstruction =
      (p.reconstruction - batch).squaredNorm() / static_cast<double>(batch.cols());
  const double decay = h.lambda * (m.w1.squaredNorm() + m.w2.squaredNorm());
  double sparsity = 0.0;
  for (Eigen::Index j = 0; j < p.rho_hat.size(); ++j) sparsity += kl_divergence(h.rho, p.rho_hat[j]);
  return reconstruction + decay + h.beta * sparsity;
}

AEGradients gradients(const AEModel& m, const Eigen::MatrixXd& batch, const AEHyper& h) {
  const BatchPass p = run_batch(m, batch);
  const double inv_m = 1.0 / static_cast<double>(batch.cols());

  const Eigen::MatrixXd out_delta = (2.0 * inv_m) * (p.reconstruction - batch);
  const Eigen::ArrayXd kl_slope =
      (-h.rho / p.rho_hat.array() + (1.0 - h.rho) / (1.0 - p.rho_hat.array())) * (h.beta * inv_m);
  Eigen::MatrixXd hidden_delta = m.w2.transpose() * out_delta;
  hidden_delta.colwise() += kl_slope.matrix();
  hidden_delta.array() *= p.hidden.array() * (1.0 - p.hidden.array());

  AEGradients g;
  g.w2 = out_delta * p.hidden.transpose() + 2.0 * h.lambda * m.w2;
  g.b2 = out_delta.rowwise().sum();
  g.w1 = hidden_delta * batch.transpose() + 2.0 * h.lambda * m.w1;
  g.b1 = hidden_delta.rowwise().sum();
  return g;
}

AEModel init_model(const Standardizer& standardizer, const AEHyper& h, const CubeDims& dims) {
  h.validate();
  const auto d = standardizer.mean.size();
  if (dims.size() != d) throw ConfigError("autoencoder: patch dims do not match input size");
  AEModel m;
  m.hyper = h;
  m.patch_dims = dims;
  m.standardizer = standardizer;
  std::mt19937_64 rng(h.seed);
  const double r = std::sqrt(6.0 / static_cast<double>(h.hidden + d + 1));
  std::uniform_real_distribution<double> uniform(-r, r);
  m.w1.resize(h.hidden, d);
  m.w2.resize(d, h.hidden);
  for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = uniform(rng);
  for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = uniform(rng);
  m.b1 = Eigen::VectorXd::Zero(h.hidden);
  m.b2 = Eigen::VectorXd::Zero(d);
  return m;
}

AEModel train(const Eigen::MatrixXd& patches, const AEHyper& h, const CubeDims& dims) {
  h.validate();
  if (patches.cols() < h.batch) {
    throw DataError("autoencoder: " + std::to_string(patches.cols()) +
                    " patches are fewer than one batch of " + std::to_string(h.batch));
  }
  const Standardizer standardizer = standardize_fit(patches);
  const Eigen::MatrixXd data = standardizer.apply_columns(patches);
  AEModel m = init_model(standardizer, h, dims);

  std::mt19937_64 rng(h.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.cols()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::MatrixXd batch;
  for (int epoch = 0; epoch < h.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += h.batch) {
      const std::size_t count = std::min<std::size_t>(h.batch, order.size() - start);
      batch.resize(data.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t k = 0; k < count; ++k) batch.col(k) = data.col(order[start + k]);
      epoch_loss += loss(m, batch, h);
      ++batches;
      const AEGradients g = gradients(m, batch, h);
      m.w1 -= h.learning_rate * g.w1;
      m.w2 -= h.learning_rate * g.w2;
      m.b1 -= h.learning_rate * g.b1;
      m.b2 -= h.learning_rate * g.b2;
    }
    m.loss_curve.push_back(epoch_loss / batches);
    if (!std::isfinite(m.loss_curve.back())) {
      throw NumericError("autoencoder: training diverged at epoch " + std::to_string(epoch));
    }
  }
  return m;
}

Eigen::VectorXd encode(const AEModel& m, const Eigen::VectorXd& x_raw) {
  if (x_raw.size() != m.input_dim()) throw ConfigError("autoencoder: input dimension mismatch");
  const Eigen::VectorXd z = m.standardizer.apply(x_raw);
  if (m.hyper.feature_mode == FeatureMode::Sigmoid) return sigmoid(m.w1 * z + m.b1);
  return m.w1 * z;
}

Eigen::VectorXd pooled_standardized(const AEModel& m, const Cube& big) {
  const CubeDims& sub = m.patch_dims;
  const CubeDims& d = big.dims();
  if (sub.t != d.t || d.w % sub.w != 0 || d.h % sub.h != 0) {
    throw ConfigError("cannot pool " + to_string(d) + " over " + to_string(sub) + " patches");
  }
  const int nx = d.w / sub.w;
  const int ny = d.h / sub.h;
  const Eigen::Index plane = static_cast<Eigen::Index>(sub.w) * sub.h;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(sub.size());
  for (int k = 0; k < d.t; ++k) {
    const auto frame = big.frame(k);
    Eigen::Map<RowMatrixXd> acc(sum.data() + k * plane, sub.h, sub.w);
    for (int by = 0; by < ny; ++by)
      for (int bx = 0; bx < nx; ++bx) acc += frame.block(by * sub.h, bx * sub.w, sub.h, sub.w);
  }
  return m.standardizer.apply(sum / static_cast<double>(nx * ny));
}

Eigen::VectorXd encode_pooled(const AEModel& m, const Cube& big) {
  if (m.hyper.feature_mode == FeatureMode::Linear) return m.w1 * pooled_standardized(m, big);
  const auto parts = subdivide(big, m.patch_dims);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m.hidden_dim());
  for (const auto& p : parts) y += encode(m, p.data());
  return y / static_cast<double>(parts.size());
}

Eigen::MatrixXd encode_pooled_batch(const AEModel& m, const std::vector<Cube>& cubes) {
  const auto n = static_cast<Eigen::Index>(cubes.size());
  if (m.hyper.feature_mode == FeatureMode::Linear) {
    Eigen::MatrixXd pooled(m.input_dim(), n);
    for (Eigen::Index i = 0; i < n; ++i) pooled.col(i) = pooled_standardized(m, cubes[i]);
    return m.w1 * pooled;
  }
  Eigen::MatrixXd out(m.hidden_dim(), n);
  for (Eigen::Index i = 0; i < n; ++i) out.col(i) = encode_pooled(m, cubes[i]);
  return out;
}

}  // namespace vad
