#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvlm/io.hpp"
#include "mvlm/pipeline.hpp"
#include "mvlm/plot.hpp"
#include "mvlm/synthetic.hpp"

namespace {

using namespace mvlm;

// Exit codes, documented in the README: parse, calibration, and empty-result
// failures are distinguishable for scripting; everything else is 1.
constexpr int kExitOk = 0;
constexpr int kExitGeneric = 1;
constexpr int kExitParse = 2;
constexpr int kExitCalibration = 3;
constexpr int kExitEmptyResult = 4;

struct SimulateOptions {
  std::string out_dir;
  int cameras = 16;
  double radius = 3.0;
  std::vector<double> heights = {1.4};
  std::vector<double> look_at = {0.0, 0.0, 1.0};
  double focal = 420.0;
  int width = 384;
  int height = 512;
  int frames = 100;
  std::uint64_t seed = 0;
  double frame_rate = 30.0;
  double amplitude = 0.15;
  double sigma = 0.0;
  double dropout = 0.0;
};

struct RangeOptions {
  std::int64_t first_frame = -1;
  int frames = -1;
};

struct LMOptions {
  double tau = LMConfig{}.weight_threshold;
  double damping = LMConfig{}.initial_damping;
  int max_iterations = LMConfig{}.max_iterations;
  double step_tolerance = LMConfig{}.step_tolerance;

  LMConfig to_config() const {
    LMConfig config;
    config.weight_threshold = tau;
    config.initial_damping = damping;
    config.max_iterations = max_iterations;
    config.step_tolerance = step_tolerance;
    return config;
  }
};

std::optional<BoundingBoxd> parse_bounds(const std::vector<double>& values) {
  if (values.empty()) return std::nullopt;
  BoundingBoxd box;
  box.min = Vec3d(values[0], values[1], values[2]);
  box.max = Vec3d(values[3], values[4], values[5]);
  if (!box.valid()) throw ConfigError("--bounds: min must not exceed max and all values finite");
  return box;
}

int cmd_simulate(const SimulateOptions& opt) {
  RigSpec rig;
  rig.camera_count = opt.cameras;
  rig.radius = opt.radius;
  rig.heights = opt.heights;
  rig.look_at = Vec3d(opt.look_at[0], opt.look_at[1], opt.look_at[2]);
  rig.focal = opt.focal;
  rig.image_size = Eigen::Vector2i(opt.width, opt.height);

  MotionSpec motion_spec;
  motion_spec.frame_count = opt.frames;
  motion_spec.seed = opt.seed;
  motion_spec.frame_rate = opt.frame_rate;
  motion_spec.amplitude_scale = opt.amplitude;

  ObservationSpec obs;
  obs.pixel_noise_sigma = opt.sigma;
  obs.dropout_prob = opt.dropout;
  obs.seed = opt.seed;

  const std::vector<CameraViewd> views = generate_rig(rig);
  const auto motion = generate_motion(motion_spec);
  const std::vector<Detection2Dd> detections = observe(views, motion, obs);

  const std::filesystem::path out(opt.out_dir);
  write_calibration(out / "calibration.json", views);

  // One detector-format file per (frame, view), including frames a view
  // missed entirely (they carry the all-zero missing-joint convention).
  std::map<std::pair<int, int>, std::vector<Detection2Dd>> grouped;
  for (int f = 0; f < opt.frames; ++f) {
    for (const CameraViewd& view : views) grouped[{f, view.view_id}];
  }
  for (const Detection2Dd& det : detections) grouped[{det.frame_id, det.view_id}].push_back(det);
  for (const auto& [key, dets] : grouped) {
    const auto& [frame_id, view_id] = key;
    write_openpose_frame(out / "detections" / (frame_view_stem(frame_id, view_id) + ".json"),
                         dets);
  }

  TrajectorySet truth;
  truth.raw = to_trajectories(motion, opt.frame_rate);
  truth.first_frame = 0;
  truth.frame_rate = opt.frame_rate;
  write_trajectories(out / "ground_truth.json", truth);

  std::cout << "simulated " << views.size() << " cameras x " << opt.frames << " frames -> "
            << out.string() << "\n";
  return kExitOk;
}

SequenceManifest make_manifest(const std::string& calibration, const std::string& detections,
                               const RangeOptions& range, const std::string& sequence_id,
                               double frame_rate, const std::string& ground_truth,
                               const std::vector<double>& bounds) {
  SequenceManifest manifest;
  manifest.sequence_id = sequence_id;
  manifest.calibration_path = calibration;
  manifest.detection_dir = detections;
  if (range.frames > 0) {
    manifest.first_frame = std::max<std::int64_t>(range.first_frame, 0);
    manifest.frame_count = range.frames;
  }
  manifest.frame_rate = frame_rate;
  manifest.ground_truth_path = ground_truth;
  manifest.bounds = parse_bounds(bounds);
  return manifest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mvlm: multi-view 2D-detection fusion into 3D landmark trajectories,\n"
               "conditioning tokens, and skeleton control maps"};
  app.require_subcommand(1);

  // ------------------------------------------------------------- simulate
  SimulateOptions sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic rig: calibration, detections, ground truth");
  simulate->add_option("--out", sim.out_dir, "Output directory")
      ->envname("MVLM_OUTPUT_DIR")
      ->required();
  simulate->add_option("--cameras", sim.cameras, "Camera count on the circle")
      ->capture_default_str();
  simulate->add_option("--radius", sim.radius, "Circle radius (world units)")
      ->capture_default_str();
  simulate->add_option("--camera-height", sim.heights, "Camera height(s), cycled over cameras")
      ->capture_default_str();
  simulate->add_option("--look-at", sim.look_at, "Rig gaze target x y z")
      ->expected(3)
      ->capture_default_str();
  simulate->add_option("--focal", sim.focal, "Focal length (px)")->capture_default_str();
  simulate->add_option("--width", sim.width, "Image width (px)")->capture_default_str();
  simulate->add_option("--height", sim.height, "Image height (px)")->capture_default_str();
  simulate->add_option("--frames", sim.frames, "Frame count")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Seed for motion, noise, and dropout")
      ->capture_default_str();
  simulate->add_option("--frame-rate", sim.frame_rate, "Frames per second")->capture_default_str();
  simulate->add_option("--amplitude", sim.amplitude, "Motion amplitude scale (world units)")
      ->capture_default_str();
  simulate->add_option("--sigma", sim.sigma, "Detection noise sigma (px)")->capture_default_str();
  simulate->add_option("--dropout", sim.dropout, "Detection dropout probability")
      ->capture_default_str();

  // ----------------------------------------------------------- triangulate
  std::string tri_calibration, tri_detections, tri_out, tri_sequence = "sequence";
  RangeOptions tri_range;
  LMOptions tri_lm;
  double tri_frame_rate = 30.0;
  int tri_threads = 1;
  CLI::App* triangulate =
      app.add_subcommand("triangulate", "Fuse per-view detections into raw 3D trajectories");
  triangulate->add_option("--calibration", tri_calibration, "Calibration JSON")->required();
  triangulate->add_option("--detections", tri_detections, "Detection directory")->required();
  triangulate->add_option("--out", tri_out, "Output trajectory JSON")->required();
  triangulate->add_option("--first-frame", tri_range.first_frame, "First frame id (default: infer)");
  triangulate->add_option("--frames", tri_range.frames, "Frame count (default: infer)");
  triangulate->add_option("--tau", tri_lm.tau, "Confidence threshold")->capture_default_str();
  triangulate->add_option("--lm-damping", tri_lm.damping, "Initial LM damping")
      ->capture_default_str();
  triangulate->add_option("--lm-max-iterations", tri_lm.max_iterations, "LM iteration cap")
      ->capture_default_str();
  triangulate->add_option("--lm-step-tolerance", tri_lm.step_tolerance, "LM step tolerance")
      ->capture_default_str();
  triangulate->add_option("--frame-rate", tri_frame_rate, "Frames per second")
      ->capture_default_str();
  triangulate->add_option("--threads", tri_threads, "Worker threads")->capture_default_str();
  triangulate->add_option("--sequence-id", tri_sequence, "Sequence label")->capture_default_str();

  // ---------------------------------------------------------------- smooth
  std::string smooth_in, smooth_out;
  int smooth_half_window = 5, smooth_degree = 3;
  CLI::App* smooth =
      app.add_subcommand("smooth", "Add a Savitzky-Golay smoothed series to a trajectory file");
  smooth->add_option("--input", smooth_in, "Trajectory JSON")->required();
  smooth->add_option("--out", smooth_out, "Output trajectory JSON")->required();
  smooth->add_option("--half-window", smooth_half_window, "Half window M")->capture_default_str();
  smooth->add_option("--degree", smooth_degree, "Fit degree P")->capture_default_str();

  // -------------------------------------------------------------- tokenize
  std::string tok_calibration, tok_trajectory, tok_out, tok_series = "smoothed";
  int tok_sh_degree = 12, tok_roll = 8, tok_fourier = 32, tok_threads = 1;
  std::vector<double> tok_bounds;
  CLI::App* tokenize =
      app.add_subcommand("tokenize", "Emit 27x192 conditioning-token blocks per (frame, view)");
  tokenize->add_option("--calibration", tok_calibration, "Calibration JSON")->required();
  tokenize->add_option("--trajectory", tok_trajectory, "Trajectory JSON")->required();
  tokenize->add_option("--out", tok_out, "Output token file")->required();
  tokenize->add_option("--series", tok_series, "Landmark series: raw or smoothed")
      ->check(CLI::IsMember({"raw", "smoothed"}))
      ->capture_default_str();
  tokenize->add_option("--sh-degree", tok_sh_degree, "Max spherical-harmonic degree")
      ->capture_default_str();
  tokenize->add_option("--roll-harmonics", tok_roll, "Roll (sin, cos) harmonic pairs")
      ->capture_default_str();
  tokenize->add_option("--fourier-depth", tok_fourier, "Fourier frequency count")
      ->capture_default_str();
  tokenize
      ->add_option("--bounds", tok_bounds,
                   "Normalization box: minx miny minz maxx maxy maxz (default: computed)")
      ->expected(6);
  tokenize->add_option("--threads", tok_threads, "Worker threads")->capture_default_str();

  // ------------------------------------------------------------ render-maps
  std::string map_calibration, map_trajectory, map_out, map_series = "smoothed";
  SkeletonMapConfig map_config;
  int map_threads = 1;
  CLI::App* render_maps =
      app.add_subcommand("render-maps", "Rasterize 2D skeleton control maps per (frame, view)");
  render_maps->add_option("--calibration", map_calibration, "Calibration JSON")->required();
  render_maps->add_option("--trajectory", map_trajectory, "Trajectory JSON")->required();
  render_maps->add_option("--out", map_out, "Output directory")->required();
  render_maps->add_option("--series", map_series, "Landmark series: raw or smoothed")
      ->check(CLI::IsMember({"raw", "smoothed"}))
      ->capture_default_str();
  render_maps->add_option("--width", map_config.width, "Map width (px)")->capture_default_str();
  render_maps->add_option("--height", map_config.height, "Map height (px)")->capture_default_str();
  render_maps->add_option("--thickness", map_config.thickness, "Stroke thickness (px)")
      ->capture_default_str();
  render_maps->add_option("--threads", map_threads, "Worker threads")->capture_default_str();

  // ------------------------------------------------------------------- run
  std::string run_calibration, run_detections, run_out, run_truth, run_sequence = "sequence";
  RangeOptions run_range;
  LMOptions run_lm;
  PipelineConfig run_config;
  std::vector<double> run_bounds;
  bool run_no_tokens = false, run_no_maps = false;
  double run_frame_rate = 30.0;
  CLI::App* run = app.add_subcommand(
      "run", "Full pipeline: triangulate, smooth, tokenize, render maps, report");
  run->add_option("--calibration", run_calibration, "Calibration JSON")->required();
  run->add_option("--detections", run_detections, "Detection directory")->required();
  run->add_option("--out", run_out, "Output directory")
      ->envname("MVLM_OUTPUT_DIR")
      ->required();
  run->add_option("--first-frame", run_range.first_frame, "First frame id (default: infer)");
  run->add_option("--frames", run_range.frames, "Frame count (default: infer)");
  run->add_option("--tau", run_lm.tau, "Confidence threshold")->capture_default_str();
  run->add_option("--lm-damping", run_lm.damping, "Initial LM damping")->capture_default_str();
  run->add_option("--lm-max-iterations", run_lm.max_iterations, "LM iteration cap")
      ->capture_default_str();
  run->add_option("--lm-step-tolerance", run_lm.step_tolerance, "LM step tolerance")
      ->capture_default_str();
  run->add_option("--half-window", run_config.sg_half_window, "Smoother half window M")
      ->capture_default_str();
  run->add_option("--degree", run_config.sg_degree, "Smoother fit degree P")
      ->capture_default_str();
  run->add_option("--sh-degree", run_config.rotation.max_degree, "Max spherical-harmonic degree")
      ->capture_default_str();
  run->add_option("--roll-harmonics", run_config.rotation.roll_harmonics,
                  "Roll (sin, cos) harmonic pairs")
      ->capture_default_str();
  run->add_option("--fourier-depth", run_config.fourier.depth, "Fourier frequency count")
      ->capture_default_str();
  run->add_option("--map-width", run_config.map.width, "Map width (px)")->capture_default_str();
  run->add_option("--map-height", run_config.map.height, "Map height (px)")->capture_default_str();
  run->add_option("--thickness", run_config.map.thickness, "Map stroke thickness (px)")
      ->capture_default_str();
  run->add_option("--threads", run_config.threads, "Worker threads")->capture_default_str();
  run->add_flag("--no-tokens", run_no_tokens, "Skip the token file");
  run->add_flag("--no-maps", run_no_maps, "Skip skeleton maps");
  run->add_option("--ground-truth", run_truth, "Trajectory JSON to score against (adds MPJPE)");
  run->add_option("--bounds", run_bounds,
                  "Normalization box: minx miny minz maxx maxy maxz (default: computed)")
      ->expected(6);
  run->add_option("--frame-rate", run_frame_rate, "Frames per second")->capture_default_str();
  run->add_option("--sequence-id", run_sequence, "Sequence label")->capture_default_str();

  // -------------------------------------------------------------- evaluate
  std::string eval_estimate, eval_truth, eval_series = "raw", eval_out;
  bool eval_include_synth = false;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a trajectory against ground truth");
  evaluate->add_option("--estimate", eval_estimate, "Estimated trajectory JSON")->required();
  evaluate->add_option("--truth", eval_truth, "Ground-truth trajectory JSON")->required();
  evaluate->add_option("--series", eval_series, "Estimate series: raw or smoothed")
      ->check(CLI::IsMember({"raw", "smoothed"}))
      ->capture_default_str();
  evaluate->add_flag("--include-synthesized", eval_include_synth,
                     "Score gap-filled frames as well");
  evaluate->add_option("--out", eval_out, "Also write the metrics JSON here");

  // ------------------------------------------------------------------ plot
  std::string plot_in, plot_out;
  CLI::App* plot =
      app.add_subcommand("plot", "Render per-joint coordinate traces (raw vs smoothed) as SVG");
  plot->add_option("--input", plot_in, "Trajectory JSON")->required();
  plot->add_option("--out", plot_out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);

    if (triangulate->parsed()) {
      PipelineConfig config;
      config.lm = tri_lm.to_config();
      config.threads = tri_threads;
      config.output_dir = ".";  // unused by this stage
      const SequenceManifest manifest = make_manifest(
          tri_calibration, tri_detections, tri_range, tri_sequence, tri_frame_rate, "", {});
      TriangulationStageOutput stage = triangulate_sequence(manifest, config);
      write_trajectories(tri_out, stage.trajectories);
      std::cout << "triangulated " << stage.report.triangulated_ok << " (frame, joint) pairs ("
                << stage.report.insufficient_views << " insufficient, "
                << stage.report.degenerate_geometry << " degenerate, " << stage.report.synthesized
                << " gap-filled) -> " << tri_out << "\n";
      return kExitOk;
    }

    if (smooth->parsed()) {
      TrajectorySet set = read_trajectories(smooth_in);
      const SGFilterSpecd filter = sg_coefficients(smooth_half_window, smooth_degree);
      set.smoothed.clear();
      for (const LandmarkTrajectoryd& traj : set.raw) {
        const bool any_valid =
            traj.valid.empty() ||
            std::any_of(traj.valid.begin(), traj.valid.end(), [](std::uint8_t v) { return v; });
        if (!any_valid) {
          set.smoothed.push_back(traj);  // nothing to smooth; stays invalid
          continue;
        }
        set.smoothed.push_back(smooth_trajectory(fill_gaps(traj), filter));
      }
      write_trajectories(smooth_out, set);
      std::cout << "smoothed " << set.raw.size() << " joints (M=" << smooth_half_window
                << ", P=" << smooth_degree << ") -> " << smooth_out << "\n";
      return kExitOk;
    }

    if (tokenize->parsed()) {
      const TrajectorySet set = read_trajectories(tok_trajectory);
      const std::vector<CameraViewd> views = read_calibration(tok_calibration);
      RotationEncodingConfig rot;
      rot.max_degree = tok_sh_degree;
      rot.roll_harmonics = tok_roll;
      FourierConfig fourier;
      fourier.depth = tok_fourier;
      const TokenFile tokens = tokenize_trajectories(
          set, tok_series == "smoothed", views, rot, fourier, parse_bounds(tok_bounds), tok_threads);
      write_tokens(tok_out, tokens);
      std::cout << "wrote " << tokens.blocks.size() << " token blocks (" << tokens.frame_count()
                << " frames x " << tokens.view_ids.size() << " views) -> " << tok_out << "\n";
      return kExitOk;
    }

    if (render_maps->parsed()) {
      const TrajectorySet set = read_trajectories(map_trajectory);
      const std::vector<CameraViewd> views = read_calibration(map_calibration);
      render_map_files(set, map_series == "smoothed", views, map_config, map_out, map_threads);
      const std::size_t count = set.raw.empty() ? 0 : set.raw.front().positions.size() * views.size();
      std::cout << "rendered " << count << " skeleton maps -> " << map_out << "\n";
      return kExitOk;
    }

    if (run->parsed()) {
      run_config.lm = run_lm.to_config();
      run_config.output_dir = run_out;
      run_config.emit_tokens = !run_no_tokens;
      run_config.emit_maps = !run_no_maps;
      const SequenceManifest manifest =
          make_manifest(run_calibration, run_detections, run_range, run_sequence, run_frame_rate,
                        run_truth, run_bounds);
      const RunReport report = run_pipeline(manifest, run_config);
      std::cout << "ok: " << report.triangulated_ok << ", insufficient: "
                << report.insufficient_views << ", degenerate: " << report.degenerate_geometry
                << ", gap-filled: " << report.synthesized;
      if (report.mpjpe_raw) std::cout << ", mpjpe_raw: " << *report.mpjpe_raw;
      if (report.mpjpe_smoothed) std::cout << ", mpjpe_smoothed: " << *report.mpjpe_smoothed;
      std::cout << "\nreport: " << (run_config.output_dir / "report.json").string() << "\n";
      return kExitOk;
    }

    if (evaluate->parsed()) {
      const TrajectorySet estimate = read_trajectories(eval_estimate);
      const TrajectorySet truth = read_trajectories(eval_truth);
      const std::vector<LandmarkTrajectoryd>& series =
          eval_series == "smoothed" ? estimate.smoothed : estimate.raw;
      if (series.empty()) {
        throw InputError("estimate file has no '" + eval_series + "' series");
      }
      const double err = mpjpe(series, truth.raw, eval_include_synth);
      const double jitter = mean_jitter(series);
      char buf[160];
      std::snprintf(buf, sizeof(buf), "{\n  \"jitter\": %.12g,\n  \"mpjpe\": %.12g\n}\n", jitter,
                    err);
      std::cout << buf;
      if (!eval_out.empty()) write_file(eval_out, buf);
      return kExitOk;
    }

    if (plot->parsed()) {
      emit_plot(read_trajectories(plot_in), plot_out);
      std::cout << "plot -> " << plot_out << "\n";
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const CalibrationError& e) {
    std::cerr << "calibration error: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const EmptyTrajectoryError& e) {
    std::cerr << "empty result: " << e.what() << "\n";
    return kExitEmptyResult;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGeneric;
  }
  return kExitGeneric;
}
