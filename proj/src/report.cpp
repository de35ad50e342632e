#include "vad/report.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "vad/errors.hpp"

namespace vad {
namespace {

constexpr std::string_view kMagic = "# vad-detection-report 1";

char label_char(Label l) { return l == Label::Anomaly ? 'A' : 'N'; }

Label parse_label(char c) {
  if (c == 'A') return Label::Anomaly;
  if (c == 'N') return Label::Normal;
  throw DataError(std::string("report: bad label '") + c + "'");
}

double parse_real(const std::string& token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw DataError("report: bad number '" + token + "'");
  }
  return v;
}

template <typename T>
T read_field(std::istringstream& in, const std::string& what) {
  T v{};
  if (!(in >> v)) throw DataError("report: missing " + what);
  return v;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_detection_report(std::ostream& out, const DetectionResult& r,
                            const ReportHeader& header) {
  out << kMagic << '\n';
  for (const auto& [k, v] : header) out << "# " << k << ' ' << v << '\n';
  out << "geometry " << r.width << ' ' << r.height << ' ' << r.frame_count << ' ' << r.cube.w << ' '
      << r.cube.h << ' ' << r.cube.t << ' ' << r.rows << ' ' << r.cols << ' ' << r.slabs.size()
      << '\n';
  out << "fusion " << to_string(r.fusion) << ' ' << format_real(r.alpha) << '\n';
  for (const auto& slab : r.slabs) {
    out << "slab " << slab.slab << '\n';
    std::string labels;
    for (int row = 0; row < r.rows; ++row) {
      for (int col = 0; col < r.cols; ++col) {
        const auto& c = slab.cubes[static_cast<std::size_t>(row * r.cols + col)];
        out << "cube " << row << ' ' << col << ' ' << format_real(c.global.score) << ' '
            << format_real(c.global.ratio) << ' ' << format_real(c.local.score) << ' '
            << format_real(c.local.ratio) << ' ' << format_real(c.fused.ratio) << ' '
            << label_char(c.global.label) << label_char(c.local.label)
            << label_char(c.fused.label) << '\n';
        labels += c.fused.label == Label::Anomaly ? '1' : '0';
      }
    }
    const auto flagged = std::count(labels.begin(), labels.end(), '1');
    for (int k = 0; k < r.cube.t; ++k) {
      const int f = slab.slab * r.cube.t + k;
      out << "frame " << f << ' ' << format_real(r.frame_scores[static_cast<std::size_t>(f)]) << ' '
          << flagged << ' ' << labels << '\n';
    }
  }
  for (int f = static_cast<int>(r.slabs.size()) * r.cube.t; f < r.frame_count; ++f) {
    out << "frame " << f << " 0 0 -\n";
  }
}

DetectionResult read_detection_report(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw DataError("not a detection report");
  DetectionResult r;
  std::size_t declared_slabs = 0;
  bool have_geometry = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "geometry") {
      r.width = read_field<int>(ls, "width");
      r.height = read_field<int>(ls, "height");
      r.frame_count = read_field<int>(ls, "frames");
      r.cube.w = read_field<int>(ls, "cube width");
      r.cube.h = read_field<int>(ls, "cube height");
      r.cube.t = read_field<int>(ls, "cube depth");
      r.rows = read_field<int>(ls, "rows");
      r.cols = read_field<int>(ls, "cols");
      declared_slabs = read_field<std::size_t>(ls, "slabs");
      if (r.width < 1 || r.height < 1 || r.frame_count < 1 || r.cube.w < 1 || r.cube.h < 1 ||
          r.cube.t < 1 || r.rows < 0 || r.cols < 0) {
        throw DataError("report: invalid geometry");
      }
      have_geometry = true;
    } else if (kind == "fusion") {
      r.fusion = parse_fusion_mode(read_field<std::string>(ls, "fusion mode"));
      r.alpha = parse_real(read_field<std::string>(ls, "alpha"));
    } else if (kind == "slab") {
      if (!have_geometry) throw DataError("report: slab before geometry");
      SlabResult s;
      s.slab = read_field<int>(ls, "slab index");
      if (s.slab != static_cast<int>(r.slabs.size())) throw DataError("report: slabs out of order");
      s.cubes.resize(static_cast<std::size_t>(r.rows) * r.cols);
      r.slabs.push_back(std::move(s));
    } else if (kind == "cube") {
      if (r.slabs.empty()) throw DataError("report: cube before slab");
      const int row = read_field<int>(ls, "row");
      const int col = read_field<int>(ls, "col");
      if (row < 0 || row >= r.rows || col < 0 || col >= r.cols) {
        throw DataError("report: cube index out of range");
      }
      auto& c = r.slabs.back().cubes[static_cast<std::size_t>(row * r.cols + col)];
      c.global.score = parse_real(read_field<std::string>(ls, "global score"));
      c.global.ratio = parse_real(read_field<std::string>(ls, "global ratio"));
      c.local.score = parse_real(read_field<std::string>(ls, "local score"));
      c.local.ratio = parse_real(read_field<std::string>(ls, "local ratio"));
      c.fused.ratio = c.fused.score = parse_real(read_field<std::string>(ls, "fused ratio"));
      const auto labels = read_field<std::string>(ls, "labels");
      if (labels.size() != 3) throw DataError("report: bad label triple");
      c.global.label = parse_label(labels[0]);
      c.local.label = parse_label(labels[1]);
      c.fused.label = parse_label(labels[2]);
    } else if (kind == "frame") {
      // Derived data; recomputed below.
    } else {
      throw DataError("report: unknown record '" + kind + "'");
    }
  }
  if (!have_geometry) throw DataError("report: missing geometry");
  if (r.slabs.size() != declared_slabs) throw DataError("report: slab count mismatch");

  r.frame_scores.assign(static_cast<std::size_t>(r.frame_count), 0.0);
  for (int f = 0; f < r.frame_count; ++f) {
    const auto slab = static_cast<std::size_t>(f / r.cube.t);
    if (slab < r.slabs.size()) {
      for (const auto& c : r.slabs[slab].cubes) {
        r.frame_scores[static_cast<std::size_t>(f)] =
            std::max(r.frame_scores[static_cast<std::size_t>(f)], c.fused.ratio);
      }
    }
    Frame mask = Frame::Zero(r.height, r.width);
    if (slab < r.slabs.size()) {
      const auto& cubes = r.slabs[slab].cubes;
      for (int row = 0; row < r.rows; ++row)
        for (int col = 0; col < r.cols; ++col)
          if (cubes[static_cast<std::size_t>(row * r.cols + col)].fused.label == Label::Anomaly)
            mask.block(row * r.cube.h, col * r.cube.w, r.cube.h, r.cube.w).setConstant(255);
    }
    r.masks.push_back(std::move(mask));
  }
  return r;
}

}  // namespace vad
