#include "vad/app.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vad/errors.hpp"
#include "vad/eval.hpp"
#include "vad/model_io.hpp"
#include "vad/report.hpp"

namespace vad::app {
namespace fs = std::filesystem;
namespace {

constexpr const char* kAutoencoderFile = "autoencoder.bin";
constexpr const char* kGlobalFile = "global.clf";
constexpr const char* kLocalFile = "local.clf";

CubeDims to_dims(const std::vector<int>& v, const char* what) {
  if (v.size() != 3) throw ConfigError(std::string(what) + " needs three values: w h t");
  return {v[0], v[1], v[2]};
}

Range to_range(const std::vector<double>& v, const char* what) {
  if (v.size() != 2) throw ConfigError(std::string(what) + " needs two values: lo hi");
  return {v[0], v[1]};
}

bool has_frames(const fs::path& dir, const std::string& pattern) {
  return fs::is_directory(dir) && !list_frames(dir, pattern).empty();
}

/// A frame directory, a scene directory (with frames/), or a directory of
/// clips, one subdirectory per video.
std::vector<fs::path> resolve_videos(const fs::path& dir, const std::string& pattern) {
  if (!fs::is_directory(dir)) {
    throw LoadError(LoadError::Kind::MissingDirectory, "no such directory: " + dir.string());
  }
  if (has_frames(dir, pattern)) return {dir};
  if (has_frames(dir / "frames", pattern)) return {dir / "frames"};
  std::vector<fs::path> clips;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_directory()) continue;
    if (has_frames(e.path(), pattern)) {
      clips.push_back(e.path());
    } else if (has_frames(e.path() / "frames", pattern)) {
      clips.push_back(e.path() / "frames");
    }
  }
  std::sort(clips.begin(), clips.end());
  if (clips.empty()) {
    throw LoadError(LoadError::Kind::NoMatchingFiles,
                    "no frames matching '" + pattern + "' under " + dir.string());
  }
  return clips;
}

fs::path resolve_truth(const fs::path& dir, const std::string& pattern) {
  if (has_frames(dir / "truth", pattern)) return dir / "truth";
  return dir;
}

ReportHeader provenance(const RunConfig& cfg) {
  const auto& d = cfg.detector;
  const auto& h = d.ae;
  return {
      {"small_cube", to_string(d.small)},
      {"big_cube", to_string(d.big)},
      {"hidden", std::to_string(h.hidden)},
      {"rho", format_real(h.rho)},
      {"beta", format_real(h.beta)},
      {"lambda", format_real(h.lambda)},
      {"learning_rate", format_real(h.learning_rate)},
      {"batch", std::to_string(h.batch)},
      {"epochs", std::to_string(h.epochs)},
      {"seed", std::to_string(h.seed)},
      {"feature_mode", h.feature_mode == FeatureMode::Linear ? "linear" : "sigmoid"},
      {"ae_max_patches", std::to_string(d.ae_max_patches)},
      {"ssim", format_real(d.ssim.k1) + " " + format_real(d.ssim.k2) + " " +
                   format_real(d.ssim.dynamic_range) + " " + std::to_string(d.ssim.window)},
      {"global_percentile", format_real(d.global_percentile)},
      {"local_percentile", format_real(d.local_percentile)},
      {"relative_epsilon", format_real(d.relative_epsilon)},
      {"fusion", std::string(to_string(d.fusion))},
      {"alpha", format_real(d.alpha)},
  };
}

void write_header(std::ostream& out, const ReportHeader& header) {
  for (const auto& [k, v] : header) out << "# " << k << ' ' << v << '\n';
}

DetectorModels load_models(const fs::path& dir, FusionMode fusion) {
  DetectorModels m;
  m.ae = read_autoencoder(dir / kAutoencoderFile);
  ClassifierFile global = read_classifier(dir / kGlobalFile);
  m.global = std::move(global.model);
  m.big = global.cube;
  if (fusion != FusionMode::GlobalOnly) m.local = read_classifier(dir / kLocalFile).model;
  return m;
}

FusionMode stored_fusion(const fs::path& dir) {
  return read_classifier(dir / kGlobalFile).fusion;
}

int cmd_synth(RunConfig& cfg, std::ostream& out) {
  if (cfg.out_dir.empty()) throw ConfigError("synth needs --out");
  SceneSpec spec = cfg.scene;
  if (!cfg.spec_file.empty()) {
    std::ifstream in(cfg.spec_file);
    if (!in) throw DataError("cannot read scene spec " + cfg.spec_file);
    std::stringstream text;
    text << in.rdbuf();
    spec = parse_scene_spec(text.str());
  }
  const Scene scene = generate(spec);
  write_scene(cfg.out_dir, scene);
  std::ofstream(fs::path(cfg.out_dir) / "scene.spec") << format_scene_spec(spec);
  std::int64_t anomalous = 0;
  for (const auto& m : scene.truth.masks) anomalous += (m.array() != 0).any();
  out << "synth frames " << scene.video.frame_count() << " size " << spec.width << "x"
      << spec.height << " anomalous_frames " << anomalous << " out " << cfg.out_dir << '\n';
  return kOk;
}

int cmd_train(RunConfig& cfg, std::ostream& out) {
  if (cfg.train_dirs.empty()) throw ConfigError("train needs --train");
  if (cfg.model_dir.empty()) throw ConfigError("train needs --model");
  std::vector<FrameVolume> videos;
  for (const auto& d : cfg.train_dirs)
    for (const auto& clip : resolve_videos(d, cfg.pattern))
      videos.push_back(load_frame_sequence(clip, cfg.pattern));

  const DetectorModels models = train_detector(videos, cfg.detector);
  fs::create_directories(cfg.model_dir);
  const fs::path dir(cfg.model_dir);
  write_autoencoder(dir / kAutoencoderFile, models.ae);
  write_classifier(dir / kGlobalFile, {models.global, cfg.detector.fusion, models.big});
  write_classifier(dir / kLocalFile, {*models.local, cfg.detector.fusion, models.big});
  {
    std::ofstream curve(dir / "loss_curve.txt");
    curve << "# epoch loss\n";
    for (std::size_t i = 0; i < models.ae.loss_curve.size(); ++i) {
      curve << i + 1 << ' ' << format_real(models.ae.loss_curve[i]) << '\n';
    }
  }
  {
    std::ofstream meta(dir / "model.txt");
    meta << "# vad-model 1\n";
    write_header(meta, provenance(cfg));
    meta << "# feature_dim " << models.ae.hidden_dim() << '\n'
         << "# local_dim " << models.local->dim() << '\n'
         << "# global_threshold " << format_real(*models.global.threshold) << '\n'
         << "# local_threshold " << format_real(*models.local->threshold) << '\n';
  }
  out << "train videos " << videos.size() << " feature_dim " << models.ae.hidden_dim()
      << " local_dim " << models.local->dim() << " first_loss "
      << format_real(models.ae.loss_curve.front()) << " final_loss "
      << format_real(models.ae.loss_curve.back()) << '\n';
  return kOk;
}

int cmd_detect(RunConfig& cfg, std::ostream& out) {
  if (cfg.test_dir.empty() || cfg.model_dir.empty() || cfg.out_dir.empty()) {
    throw ConfigError("detect needs --test, --model and --out");
  }
  if (cfg.fusion.empty()) cfg.detector.fusion = stored_fusion(cfg.model_dir);
  const DetectorModels models = load_models(cfg.model_dir, cfg.detector.fusion);
  const auto clips = resolve_videos(cfg.test_dir, cfg.pattern);
  if (clips.size() != 1) throw ConfigError("detect expects a single test video");
  const FrameVolume test = load_frame_sequence(clips.front(), cfg.pattern);
  const DetectionResult r = detect(models, test, cfg.detector);

  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir / "masks");
  for (int f = 0; f < r.frame_count; ++f) {
    write_pgm(dir / "masks" / frame_filename(f), r.masks[static_cast<std::size_t>(f)]);
  }
  std::ofstream report(dir / "report.txt");
  write_detection_report(report, r, provenance(cfg));

  double total = 0.0;
  for (double s : r.slab_seconds) total += s;
  std::int64_t flagged = 0;
  for (const auto& m : r.masks) flagged += (m.array() != 0).any();
  out << "detect frames " << r.frame_count << " anomalous_frames " << flagged
      << " seconds_per_frame " << (r.frame_count ? total / r.frame_count : 0.0) << '\n';
  return kOk;
}

int cmd_eval(RunConfig& cfg, std::ostream& out) {
  if (cfg.gt_dir.empty()) throw ConfigError("eval needs --gt");
  if (cfg.det_dir.empty() == cfg.masks_dir.empty()) {
    throw ConfigError("eval needs exactly one of --det or --masks");
  }
  const GroundTruth gt = load_ground_truth(resolve_truth(cfg.gt_dir, cfg.pattern), cfg.pattern);

  std::vector<double> alphas;
  std::vector<std::vector<PixelCounts>> counts;
  if (!cfg.det_dir.empty()) {
    fs::path report_path(cfg.det_dir);
    if (fs::is_directory(report_path)) report_path /= "report.txt";
    std::ifstream in(report_path);
    if (!in) throw DataError("cannot read detection report " + report_path.string());
    const DetectionResult r = read_detection_report(in);
    alphas = cfg.alphas.empty() ? default_alpha_sweep(r) : cfg.alphas;
    counts = sweep_counts(r, gt, alphas);
  } else {
    // Fixed masks give one operating point.
    fs::path mask_dir(cfg.masks_dir);
    if (has_frames(mask_dir / "masks", cfg.pattern)) mask_dir /= "masks";
    const GroundTruth masks = load_ground_truth(mask_dir, cfg.pattern);
    if (masks.masks.size() != gt.masks.size()) {
      throw DataError("eval: " + std::to_string(masks.masks.size()) + " masks vs " +
                      std::to_string(gt.masks.size()) + " ground-truth frames");
    }
    alphas = {1.0};
    counts.emplace_back();
    for (std::size_t f = 0; f < gt.masks.size(); ++f) {
      counts.back().push_back(count_pixels(masks.masks[f], gt.masks[f]));
    }
  }

  std::ostringstream report;
  report << "# vad-eval-report 1\n";
  report << "# frames " << gt.masks.size() << "\n# alphas " << alphas.size() << '\n';
  std::ostringstream summary;
  for (const auto& name : cfg.measures) {
    const Measure m = parse_measure(name);
    const std::vector<double> betas =
        m == Measure::DualPixel ? cfg.betas : std::vector<double>{0.0};
    for (double beta : betas) {
      const RocCurve c = roc(counts, alphas, m, beta);
      for (const auto& p : c.points) {
        report << "roc " << to_string(m) << ' ' << format_real(beta) << ' '
               << (std::isnan(p.alpha) ? std::string("anchor") : format_real(p.alpha)) << ' '
               << format_real(p.fpr) << ' ' << format_real(p.tpr) << '\n';
      }
      summary << "summary " << to_string(m) << ' ' << format_real(beta) << " eer "
              << format_real(eer(c)) << " auc " << format_real(auc(c)) << '\n';
    }
  }
  report << summary.str();
  if (cfg.out_file.empty()) {
    out << report.str();
  } else {
    std::ofstream(cfg.out_file) << report.str();
    out << summary.str();
  }
  return kOk;
}

int cmd_bench(RunConfig& cfg, std::ostream& out) {
  if (cfg.test_dir.empty() || cfg.model_dir.empty()) {
    throw ConfigError("bench needs --test and --model");
  }
  if (cfg.fusion.empty()) cfg.detector.fusion = stored_fusion(cfg.model_dir);
  const DetectorModels models = load_models(cfg.model_dir, cfg.detector.fusion);
  const auto clips = resolve_videos(cfg.test_dir, cfg.pattern);
  const FrameVolume test = load_frame_sequence(clips.front(), cfg.pattern);

  std::vector<double> run_medians;
  std::vector<double> all;
  for (int i = 0; i < cfg.repeats; ++i) {
    const BenchStats s = benchmark(models, test, cfg.detector, 1);
    run_medians.push_back(s.median);
    all.insert(all.end(), s.samples.begin(), s.samples.end());
  }
  const double median = percentile(all, 50.0);
  const double p95 = percentile(all, 95.0);
  const auto [lo, hi] = std::minmax_element(run_medians.begin(), run_medians.end());
  const char* status = median <= cfg.target_seconds  ? "PASS"
                       : median <= cfg.limit_seconds ? "WARN"
                                                     : "FAIL";
  out << "bench size " << test.width() << "x" << test.height() << " frames " << test.frame_count()
      << " repeats " << cfg.repeats << " samples " << all.size() << '\n'
      << "bench median_s_per_frame " << format_real(median) << " p95_s_per_frame "
      << format_real(p95) << '\n'
      << "bench run_median_min " << format_real(*lo) << " run_median_max " << format_real(*hi)
      << '\n'
      << "bench target " << format_real(cfg.target_seconds) << " limit "
      << format_real(cfg.limit_seconds) << " status " << status << '\n';
  return median > cfg.limit_seconds ? kBenchFailed : kOk;
}

}  // namespace

std::unique_ptr<CLI::App> make_app(RunConfig& cfg) {
  auto app = std::make_unique<CLI::App>("Real-time video anomaly detection and localization", "vad");
  app->option_defaults()->always_capture_default();
  app->set_config("--config", "", "Read options from an INI/TOML file");
  app->require_subcommand(1);

  auto& d = cfg.detector;
  auto add_detector = [&](CLI::App* sub) {
    sub->add_option("--small-cube", cfg.small_cube, "Auto-encoder patch w h t")->expected(3);
    sub->add_option("--big-cube", cfg.big_cube, "Classification cube w h t")->expected(3);
    sub->add_option("--fusion", cfg.fusion, "prose_and | eq4_or | global_only");
    sub->add_option("--alpha", d.alpha, "Threshold multiplier");
    sub->add_option("--ssim-k1", d.ssim.k1);
    sub->add_option("--ssim-k2", d.ssim.k2);
    sub->add_option("--ssim-range", d.ssim.dynamic_range);
    sub->add_option("--ssim-window", d.ssim.window, "0 = global SSIM");
  };

  auto* synth = app->add_subcommand("synth", "Generate a synthetic crowd scene");
  synth->add_option("--spec", cfg.spec_file, "Scene spec file (key = value)");
  synth->add_option("--out", cfg.out_dir, "Output directory");
  synth->add_option("--width", cfg.scene.width);
  synth->add_option("--height", cfg.scene.height);
  synth->add_option("--frames", cfg.scene.frames);
  synth->add_option("--seed", cfg.scene.seed);
  synth->add_option("--background-seed", cfg.scene.background_seed);
  synth->add_option("--background-amplitude", cfg.scene.background_amplitude);
  synth->add_option("--noise", cfg.scene.noise_amplitude);
  synth->add_option("--walkers", cfg.scene.walkers);
  synth->add_option("--jitter", cfg.scene.jitter);
  synth->add_option("--anomalies", cfg.anomaly_count, "Number of anomalous objects");
  synth->add_option("--anomaly-size", cfg.anomaly_size)->expected(2);
  synth->add_option("--anomaly-speed", cfg.anomaly_speed)->expected(2);
  synth->add_option("--anomaly-onset", cfg.anomaly_onset);

  auto* train = app->add_subcommand("train", "Train both views on normal video");
  train->add_option("--train", cfg.train_dirs, "Normal frame directories")->take_all()->default_str("");
  train->add_option("--model", cfg.model_dir, "Model output directory");
  train->add_option("--pattern", cfg.pattern);
  train->add_option("--hidden", d.ae.hidden);
  train->add_option("--rho", d.ae.rho, "Sparsity target");
  train->add_option("--sparsity-weight", d.ae.beta);
  train->add_option("--weight-decay", d.ae.lambda);
  train->add_option("--learning-rate", d.ae.learning_rate);
  train->add_option("--batch", d.ae.batch);
  train->add_option("--epochs", d.ae.epochs);
  train->add_option("--seed", d.ae.seed);
  train->add_option("--feature-mode", cfg.feature_mode, "linear | sigmoid");
  train->add_option("--ae-max-patches", d.ae_max_patches);
  train->add_option("--global-percentile", d.global_percentile);
  train->add_option("--local-percentile", d.local_percentile);
  train->add_option("--epsilon", d.relative_epsilon, "Relative covariance regularizer");
  add_detector(train);

  auto* det = app->add_subcommand("detect", "Score a test video");
  det->add_option("--test", cfg.test_dir);
  det->add_option("--model", cfg.model_dir);
  det->add_option("--out", cfg.out_dir);
  det->add_option("--pattern", cfg.pattern);
  add_detector(det);

  auto* ev = app->add_subcommand("eval", "Frame, pixel and dual-pixel ROC/EER/AUC");
  ev->add_option("--gt", cfg.gt_dir, "Ground-truth mask directory");
  ev->add_option("--det", cfg.det_dir, "Detection output directory (report.txt)");
  ev->add_option("--masks", cfg.masks_dir, "Fixed masks (single operating point)");
  ev->add_option("--measure", cfg.measures)->take_all();
  ev->add_option("--beta", cfg.betas)->take_all();
  ev->add_option("--alphas", cfg.alphas, "Alpha sweep (default: from the scores)")->take_all()->default_str("");
  ev->add_option("--out", cfg.out_file, "Report file (default: stdout)");
  ev->add_option("--pattern", cfg.pattern);

  auto* bench = app->add_subcommand("bench", "Time the detect path");
  bench->add_option("--test", cfg.test_dir);
  bench->add_option("--model", cfg.model_dir);
  bench->add_option("--repeats", cfg.repeats);
  bench->add_option("--target", cfg.target_seconds, "Seconds per frame target");
  bench->add_option("--limit", cfg.limit_seconds, "Seconds per frame hard limit");
  bench->add_option("--pattern", cfg.pattern);
  add_detector(bench);

  for (auto* sub : {synth, train, det, ev, bench}) {
    sub->callback([&cfg, sub] { cfg.command = sub->get_name(); });
  }
  return app;
}

void finalize(RunConfig& cfg) {
  auto& d = cfg.detector;
  d.small = to_dims(cfg.small_cube, "--small-cube");
  d.big = to_dims(cfg.big_cube, "--big-cube");
  if (!cfg.fusion.empty()) d.fusion = parse_fusion_mode(cfg.fusion);
  if (cfg.feature_mode == "linear") {
    d.ae.feature_mode = FeatureMode::Linear;
  } else if (cfg.feature_mode == "sigmoid") {
    d.ae.feature_mode = FeatureMode::Sigmoid;
  } else {
    throw ConfigError("unknown feature mode '" + cfg.feature_mode + "'");
  }
  cfg.scene.anomalies.clear();
  for (int i = 0; i < cfg.anomaly_count; ++i) {
    cfg.scene.anomalies.push_back({to_range(cfg.anomaly_size, "--anomaly-size"),
                                   to_range(cfg.anomaly_speed, "--anomaly-speed"),
                                   cfg.anomaly_onset});
  }
  if (cfg.repeats < 1) throw ConfigError("--repeats must be >= 1");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  auto app = make_app(cfg);
  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app->parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app->help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app->help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    finalize(cfg);
    if (cfg.command == "synth") return cmd_synth(cfg, out);
    if (cfg.command == "train") return cmd_train(cfg, out);
    if (cfg.command == "detect") return cmd_detect(cfg, out);
    if (cfg.command == "eval") return cmd_eval(cfg, out);
    if (cfg.command == "bench") return cmd_bench(cfg, out);
    err << "error: no command\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumericError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace vad::app
