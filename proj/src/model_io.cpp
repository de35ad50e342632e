#include "vad/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "vad/errors.hpp"

namespace vad {
namespace {

static_assert(std::endian::native == std::endian::little, "model files assume little endian");

constexpr char kAeMagic[8] = {'V', 'A', 'D', 'A', 'E', 'M', 'D', 'L'};
constexpr char kGaussMagic[8] = {'V', 'A', 'D', 'G', 'A', 'U', 'S', 'S'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot write " + path.string());
  }
  ~Writer() = default;

  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void text(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  template <typename Derived>
  void matrix(const Eigen::PlainObjectBase<Derived>& m) {
    put<std::int64_t>(m.rows());
    put<std::int64_t>(m.cols());
    bytes(reinterpret_cast<const char*>(m.data()), sizeof(double) * m.size());
  }
  void finish() {
    out_.flush();
    if (!out_) throw DataError("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw DataError("cannot open " + path.string());
  }

  template <typename T>
  T get() {
    T v{};
    bytes(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
  }
  void bytes(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) fail("truncated file");
  }
  std::string text() {
    const auto n = get<std::uint32_t>();
    if (n > (1u << 20)) fail("corrupt string length");
    std::string s(n, '\0');
    bytes(s.data(), n);
    return s;
  }
  template <typename MatrixType>
  MatrixType matrix() {
    const auto rows = get<std::int64_t>();
    const auto cols = get<std::int64_t>();
    if (rows < 0 || cols < 0 || rows * cols > (std::int64_t{1} << 28)) fail("corrupt matrix shape");
    MatrixType m(rows, cols);
    bytes(reinterpret_cast<char*>(m.data()), sizeof(double) * m.size());
    return m;
  }
  void magic(const char (&expected)[8]) {
    char got[8];
    bytes(got, 8);
    if (std::memcmp(got, expected, 8) != 0) fail("unrecognized file type");
    const auto version = get<std::uint32_t>();
    if (version != kVersion) fail("unsupported version " + std::to_string(version));
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw DataError(path_.string() + ": " + why);
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

void put_dims(Writer& w, const CubeDims& d) {
  w.put<std::int32_t>(d.w);
  w.put<std::int32_t>(d.h);
  w.put<std::int32_t>(d.t);
}

CubeDims get_dims(Reader& r) {
  CubeDims d;
  d.w = r.get<std::int32_t>();
  d.h = r.get<std::int32_t>();
  d.t = r.get<std::int32_t>();
  return d;
}

}  // namespace

void write_autoencoder(const std::filesystem::path& path, const AEModel& m) {
  m.validate();
  Writer w(path);
  w.bytes(kAeMagic, 8);
  w.put(kVersion);
  w.text(kRasterOrderTag);
  put_dims(w, m.patch_dims);
  const auto& h = m.hyper;
  w.put<std::int32_t>(h.hidden);
  w.put(h.rho);
  w.put(h.beta);
  w.put(h.lambda);
  w.put(h.learning_rate);
  w.put<std::int32_t>(h.batch);
  w.put<std::int32_t>(h.epochs);
  w.put<std::uint64_t>(h.seed);
  w.put<std::int32_t>(static_cast<std::int32_t>(h.feature_mode));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(m.loss_curve.size()));
  for (double v : m.loss_curve) w.put(v);
  w.matrix(m.w1);
  w.matrix(m.w2);
  w.matrix(m.b1);
  w.matrix(m.b2);
  w.matrix(m.standardizer.mean);
  w.matrix(m.standardizer.stddev);
  w.finish();
}

AEModel read_autoencoder(const std::filesystem::path& path) {
  Reader r(path);
  r.magic(kAeMagic);
  if (r.text() != kRasterOrderTag) r.fail("unknown rasterization order");
  AEModel m;
  m.patch_dims = get_dims(r);
  auto& h = m.hyper;
  h.hidden = r.get<std::int32_t>();
  h.rho = r.get<double>();
  h.beta = r.get<double>();
  h.lambda = r.get<double>();
  h.learning_rate = r.get<double>();
  h.batch = r.get<std::int32_t>();
  h.epochs = r.get<std::int32_t>();
  h.seed = r.get<std::uint64_t>();
  const auto mode = r.get<std::int32_t>();
  if (mode != 0 && mode != 1) r.fail("unknown feature mode");
  h.feature_mode = static_cast<FeatureMode>(mode);
  const auto n = r.get<std::uint32_t>();
  if (n > 1'000'000) r.fail("corrupt loss curve");
  m.loss_curve.resize(n);
  for (auto& v : m.loss_curve) v = r.get<double>();
  m.w1 = r.matrix<Eigen::MatrixXd>();
  m.w2 = r.matrix<Eigen::MatrixXd>();
  m.b1 = r.matrix<Eigen::VectorXd>();
  m.b2 = r.matrix<Eigen::VectorXd>();
  m.standardizer.mean = r.matrix<Eigen::VectorXd>();
  m.standardizer.stddev = r.matrix<Eigen::VectorXd>();
  m.validate();
  return m;
}

void write_classifier(const std::filesystem::path& path, const ClassifierFile& c) {
  const auto& m = c.model;
  Writer w(path);
  w.bytes(kGaussMagic, 8);
  w.put(kVersion);
  w.text(to_string(m.layout));
  w.put<std::int32_t>(m.dim());
  w.text(to_string(c.fusion));
  put_dims(w, c.cube);
  w.put(m.epsilon);
  w.put<std::uint8_t>(m.threshold.has_value());
  w.put(m.threshold.value_or(0.0));
  w.matrix(m.mean);
  w.matrix(m.covariance);
  w.matrix(m.precision);
  w.finish();
}

ClassifierFile read_classifier(const std::filesystem::path& path) {
  Reader r(path);
  r.magic(kGaussMagic);
  ClassifierFile c;
  auto& m = c.model;
  const std::string layout = r.text();
  if (layout == "global") {
    m.layout = DescriptorLayout::Global;
  } else if (layout == "local") {
    m.layout = DescriptorLayout::Local;
  } else {
    r.fail("unknown descriptor layout '" + layout + "'");
  }
  const auto dim = r.get<std::int32_t>();
  c.fusion = parse_fusion_mode(r.text());
  c.cube = get_dims(r);
  m.epsilon = r.get<double>();
  const bool has_threshold = r.get<std::uint8_t>() != 0;
  const double threshold = r.get<double>();
  if (has_threshold) m.threshold = threshold;
  m.mean = r.matrix<Eigen::VectorXd>();
  m.covariance = r.matrix<Eigen::MatrixXd>();
  m.precision = r.matrix<Eigen::MatrixXd>();
  if (m.mean.size() != dim || m.covariance.rows() != dim || m.covariance.cols() != dim ||
      m.precision.rows() != dim || m.precision.cols() != dim) {
    r.fail("inconsistent classifier dimensions");
  }
  return c;
}

}  // namespace vad
