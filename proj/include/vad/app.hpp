#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vad/detector.hpp"
#include "vad/synth.hpp"

namespace CLI {
class App;
}

namespace vad::app {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericError = 4,
  kBenchFailed = 5,
};

/// Everything a command reads; bound one-to-one to command-line flags and to
/// the sections of an optional INI/TOML config file (`--config`).
struct RunConfig {
  std::string command;

  // synth
  std::string spec_file;
  SceneSpec scene;
  int anomaly_count = 0;
  std::vector<double> anomaly_size{30, 40};
  std::vector<double> anomaly_speed{4, 8};
  int anomaly_onset = 40;

  // shared paths
  std::vector<std::string> train_dirs;
  std::string test_dir;
  std::string gt_dir;
  std::string det_dir;
  std::string masks_dir;
  std::string model_dir;
  std::string out_dir;
  std::string out_file;
  std::string pattern = "*.pgm";

  // detector
  DetectorConfig detector;
  std::vector<int> small_cube{10, 10, 5};
  std::vector<int> big_cube{40, 40, 5};
  std::string fusion;  // empty: prose_and when training, the stored mode otherwise
  std::string feature_mode = "linear";

  // eval
  std::vector<std::string> measures{"frame", "pixel", "dual_pixel"};
  std::vector<double> betas{0.0, 0.05, 0.10};
  std::vector<double> alphas;

  // bench
  int repeats = 5;
  double target_seconds = 0.04;
  double limit_seconds = 0.1;
};

/// Builds the command-line parser bound to `cfg`.
std::unique_ptr<CLI::App> make_app(RunConfig& cfg);

/// Completes derived fields (cube dims, modes, scene anomalies) after parsing.
void finalize(RunConfig& cfg);

/// Full CLI entry point: parses `args` (args[0] is the program name), runs the
/// selected command, and maps failures to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vad::app
