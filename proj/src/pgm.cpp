#include "vad/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "vad/errors.hpp"

namespace vad {
namespace {

using Kind = LoadError::Kind;

class HeaderReader {
 public:
  HeaderReader(const std::vector<char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int next_int() {
    skip_space_and_comments();
    long value = 0;
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) fail("header value out of range");
      ++pos_;
    }
    if (pos_ == start) fail("malformed header");
    return static_cast<int>(value);
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }

  [[noreturn]] void fail(const std::string& why) const {
    throw LoadError(Kind::Decode, path_.string() + ": " + why);
  }

 private:
  const std::vector<char>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

std::uint8_t to_byte(double v, int maxval) {
  double scaled = maxval == 255 ? v : v * 255.0 / maxval;
  return static_cast<std::uint8_t>(std::lround(std::clamp(scaled, 0.0, 255.0)));
}

}  // namespace

Frame read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(Kind::Decode, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  HeaderReader header(bytes, path);
  if (bytes.size() < 2 || bytes[0] != 'P') header.fail("not a PNM file");
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6') {
    header.fail(std::string("unsupported PNM variant P") + kind);
  }
  header.advance(2);
  const int width = header.next_int();
  const int height = header.next_int();
  const int maxval = header.next_int();
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) header.fail("bad dimensions");

  const bool color = kind == '3' || kind == '6';
  const int channels = color ? 3 : 1;
  const std::size_t samples = static_cast<std::size_t>(width) * height * channels;
  std::vector<double> values(samples);

  if (kind == '5' || kind == '6') {
    // Exactly one whitespace byte separates the header from the raster.
    header.advance(1);
    const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
    if (bytes.size() < header.pos() + samples * bytes_per_sample) header.fail("truncated raster");
    const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + header.pos());
    for (std::size_t i = 0; i < samples; ++i) {
      values[i] = bytes_per_sample == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
    }
  } else {
    for (std::size_t i = 0; i < samples; ++i) values[i] = header.next_int();
  }

  Frame frame(height, width);
  for (Eigen::Index i = 0; i < frame.size(); ++i) {
    double v = values[i * channels];
    if (color) v = 0.299 * values[3 * i] + 0.587 * values[3 * i + 1] + 0.114 * values[3 * i + 2];
    frame.data()[i] = to_byte(v, maxval);
  }
  return frame;
}

void write_pgm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "P5\n" << frame.cols() << ' ' << frame.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.data()), frame.size());
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace vad
