#include "vad/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "vad/errors.hpp"

namespace vad {
namespace {

struct Entity {
  double x = 0.0;  // top-left corner
  double y = 0.0;
  int w = 0;
  int h = 0;
  double vx = 0.0;
  double vy = 0.0;
  int onset = 0;
  Eigen::ArrayXXd texture;  // h×w
};

Eigen::ArrayXXd make_texture(int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> tone(30.0, 220.0);
  std::normal_distribution<double> grain(0.0, 25.0);
  const double base = tone(rng);
  Eigen::ArrayXXd t(h, w);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = base + grain(rng);
  return t;
}

Entity make_entity(const SceneSpec& spec, int w, int h, double speed, int onset,
                   std::mt19937_64& rng) {
  Entity e;
  e.w = w;
  e.h = h;
  std::uniform_real_distribution<double> px(0.0, spec.width - w);
  std::uniform_real_distribution<double> py(0.0, spec.height - h);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  e.x = px(rng);
  e.y = py(rng);
  const double a = angle(rng);
  e.vx = speed * std::cos(a);
  e.vy = speed * std::sin(a);
  e.onset = onset;
  e.texture = make_texture(h, w, rng);
  return e;
}

void bounce(double& pos, double& vel, double limit) {
  if (pos < 0.0) {
    pos = -pos;
    vel = std::abs(vel);
  } else if (pos > limit) {
    pos = 2.0 * limit - pos;
    vel = -std::abs(vel);
  }
  pos = std::clamp(pos, 0.0, limit);
}

void step(Entity& e, const SceneSpec& spec, double jx, double jy) {
  e.x += e.vx + jx;
  e.y += e.vy + jy;
  bounce(e.x, e.vx, spec.width - e.w);
  bounce(e.y, e.vy, spec.height - e.h);
}

Eigen::ArrayXXd make_background(const SceneSpec& spec) {
  std::mt19937_64 rng(spec.background_seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  // Coarse 8-pixel lattice, bilinearly interpolated, plus fine grain.
  constexpr int kCell = 8;
  const int gw = spec.width / kCell + 2;
  const int gh = spec.height / kCell + 2;
  Eigen::ArrayXXd lattice(gh, gw);
  for (Eigen::Index i = 0; i < lattice.size(); ++i) lattice.data()[i] = unit(rng);
  Eigen::ArrayXXd bg(spec.height, spec.width);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      const double fx = static_cast<double>(x) / kCell;
      const double fy = static_cast<double>(y) / kCell;
      const int cx = static_cast<int>(fx);
      const int cy = static_cast<int>(fy);
      const double tx = fx - cx;
      const double ty = fy - cy;
      const double coarse = (1 - ty) * ((1 - tx) * lattice(cy, cx) + tx * lattice(cy, cx + 1)) +
                            ty * ((1 - tx) * lattice(cy + 1, cx) + tx * lattice(cy + 1, cx + 1));
      bg(y, x) = 120.0 + spec.background_amplitude * (0.8 * coarse + 0.6 * unit(rng));
    }
  }
  return bg;
}

void paint(Eigen::ArrayXXd& canvas, const Entity& e, Frame* truth) {
  const int x0 = static_cast<int>(std::lround(e.x));
  const int y0 = static_cast<int>(std::lround(e.y));
  const int xa = std::max(x0, 0);
  const int ya = std::max(y0, 0);
  const int xb = std::min(x0 + e.w, static_cast<int>(canvas.cols()));
  const int yb = std::min(y0 + e.h, static_cast<int>(canvas.rows()));
  if (xa >= xb || ya >= yb) return;
  canvas.block(ya, xa, yb - ya, xb - xa) = e.texture.block(ya - y0, xa - x0, yb - ya, xb - xa);
  if (truth) truth->block(ya, xa, yb - ya, xb - xa).setOnes();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& key) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ConfigError("scene spec: bad number '" + token + "' for " + key);
  }
  return v;
}

}  // namespace

void SceneSpec::validate() const {
  if (width < 1 || height < 1 || frames < 1) throw ConfigError("scene: empty frame geometry");
  if (walkers < 0) throw ConfigError("scene: negative walker count");
  auto valid = [](const Range& r) { return r.lo > 0.0 && r.hi >= r.lo; };
  if (!valid(walker_size) || !valid(walker_speed)) throw ConfigError("scene: bad walker ranges");
  if (noise_amplitude < 0 || background_amplitude < 0 || jitter < 0) {
    throw ConfigError("scene: amplitudes must be >= 0");
  }
  const double walker_h = std::ceil(walker_size.hi * 1.5);
  if (walkers > 0 && (walker_size.hi > width || walker_h > height)) {
    throw ConfigError("scene: walkers larger than the frame");
  }
  for (const auto& a : anomalies) {
    if (!valid(a.size) || !valid(a.speed)) throw ConfigError("scene: bad anomaly ranges");
    if (a.size.hi > width || a.size.hi > height) {
      throw ConfigError("scene: anomaly larger than the frame");
    }
    if (a.onset < 0) throw ConfigError("scene: negative anomaly onset");
    if (a.size.lo < 2.0 * walker_size.hi && a.speed.lo < 2.0 * walker_speed.hi) {
      throw ConfigError("scene: anomalies must differ from walkers by 2x in size or speed");
    }
  }
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::vector<Entity> walkers;
  std::vector<Entity> blobs;
  for (int i = 0; i < spec.walkers; ++i) {
    std::uniform_real_distribution<double> size(spec.walker_size.lo, spec.walker_size.hi);
    std::uniform_real_distribution<double> speed(spec.walker_speed.lo, spec.walker_speed.hi);
    const int w = static_cast<int>(std::lround(size(rng)));
    const int h = static_cast<int>(std::lround(w * 1.5));
    walkers.push_back(make_entity(spec, w, h, speed(rng), 0, rng));
  }
  for (const auto& a : spec.anomalies) {
    std::uniform_real_distribution<double> size(a.size.lo, a.size.hi);
    std::uniform_real_distribution<double> speed(a.speed.lo, a.speed.hi);
    const int s = static_cast<int>(std::lround(size(rng)));
    blobs.push_back(make_entity(spec, s, s, speed(rng), a.onset, rng));
  }

  const Eigen::ArrayXXd background = make_background(spec);
  std::mt19937_64 motion(spec.seed ^ 0xa5a5a5a5a5a5a5a5ULL);
  std::mt19937_64 sensor(spec.seed ^ 0x3c3c3c3c3c3c3c3cULL);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<Frame> frames;
  GroundTruth truth;
  frames.reserve(static_cast<std::size_t>(spec.frames));
  for (int t = 0; t < spec.frames; ++t) {
    Eigen::ArrayXXd canvas = background;
    Frame gt = Frame::Zero(spec.height, spec.width);
    for (auto& w : walkers) {
      if (t > 0) step(w, spec, spec.jitter * jitter(motion), spec.jitter * jitter(motion));
      paint(canvas, w, nullptr);
    }
    for (auto& b : blobs) {
      if (t > b.onset) step(b, spec, spec.jitter * jitter(motion), spec.jitter * jitter(motion));
      if (t >= b.onset) paint(canvas, b, &gt);
    }
    Frame f(spec.height, spec.width);
    for (Eigen::Index i = 0; i < canvas.size(); ++i) {
      const double v = canvas(i / spec.width, i % spec.width) + spec.noise_amplitude * noise(sensor);
      f.data()[i] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
    }
    frames.push_back(std::move(f));
    truth.masks.push_back(std::move(gt));
  }
  return {FrameVolume(std::move(frames)), std::move(truth)};
}

SceneSpec parse_scene_spec(const std::string& text) {
  SceneSpec spec;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw ConfigError("scene spec line " + std::to_string(line_no) + ": expected key = value");
      }
      continue;
    }
    std::istringstream key_stream(line.substr(0, eq));
    std::string key;
    key_stream >> key;
    std::istringstream value_stream(line.substr(eq + 1));
    std::vector<double> v;
    for (std::string tok; value_stream >> tok;) v.push_back(parse_double(tok, key));
    auto expect = [&](std::size_t n) {
      if (v.size() != n) {
        throw ConfigError("scene spec: " + key + " expects " + std::to_string(n) + " values");
      }
    };
    auto as_int = [&](double d) {
      if (d != std::floor(d)) throw ConfigError("scene spec: " + key + " must be an integer");
      return static_cast<int>(d);
    };
    auto as_seed = [&](double d) {
      if (d < 0 || d != std::floor(d) || d > 9e15) {
        throw ConfigError("scene spec: " + key + " must be a non-negative integer");
      }
      return static_cast<std::uint64_t>(d);
    };
    if (key == "width") {
      expect(1);
      spec.width = as_int(v[0]);
    } else if (key == "height") {
      expect(1);
      spec.height = as_int(v[0]);
    } else if (key == "frames") {
      expect(1);
      spec.frames = as_int(v[0]);
    } else if (key == "background_seed") {
      expect(1);
      spec.background_seed = as_seed(v[0]);
    } else if (key == "background_amplitude") {
      expect(1);
      spec.background_amplitude = v[0];
    } else if (key == "noise_amplitude") {
      expect(1);
      spec.noise_amplitude = v[0];
    } else if (key == "walkers") {
      expect(1);
      spec.walkers = as_int(v[0]);
    } else if (key == "walker_size") {
      expect(2);
      spec.walker_size = {v[0], v[1]};
    } else if (key == "walker_speed") {
      expect(2);
      spec.walker_speed = {v[0], v[1]};
    } else if (key == "jitter") {
      expect(1);
      spec.jitter = v[0];
    } else if (key == "seed") {
      expect(1);
      spec.seed = as_seed(v[0]);
    } else if (key == "anomaly") {
      expect(5);
      spec.anomalies.push_back({{v[0], v[1]}, {v[2], v[3]}, as_int(v[4])});
    } else {
      throw ConfigError("scene spec: unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string format_scene_spec(const SceneSpec& s) {
  std::ostringstream out;
  auto d = format_double;
  out << "width = " << s.width << '\n'
      << "height = " << s.height << '\n'
      << "frames = " << s.frames << '\n'
      << "background_seed = " << s.background_seed << '\n'
      << "background_amplitude = " << d(s.background_amplitude) << '\n'
      << "noise_amplitude = " << d(s.noise_amplitude) << '\n'
      << "walkers = " << s.walkers << '\n'
      << "walker_size = " << d(s.walker_size.lo) << ' ' << d(s.walker_size.hi) << '\n'
      << "walker_speed = " << d(s.walker_speed.lo) << ' ' << d(s.walker_speed.hi) << '\n'
      << "jitter = " << d(s.jitter) << '\n'
      << "seed = " << s.seed << '\n';
  for (const auto& a : s.anomalies) {
    out << "anomaly = " << d(a.size.lo) << ' ' << d(a.size.hi) << ' ' << d(a.speed.lo) << ' '
        << d(a.speed.hi) << ' ' << a.onset << '\n';
  }
  return out.str();
}

std::string frame_filename(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%05d.pgm", index);
  return buf;
}

void write_scene(const std::filesystem::path& dir, const Scene& scene) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  fs::create_directories(dir / "truth");
  for (int t = 0; t < scene.video.frame_count(); ++t) {
    write_pgm(dir / "frames" / frame_filename(t), scene.video.frame(t));
    write_pgm(dir / "truth" / frame_filename(t), (scene.truth.masks[t].array() * 255).matrix());
  }
}

}  // namespace vad
