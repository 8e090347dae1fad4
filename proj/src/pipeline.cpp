#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "mvlm/pipeline.hpp"
#include "mvlm/synthetic.hpp"  // mpjpe
#include "json_util.hpp"

namespace mvlm {

namespace {

using detail::json;

/// Runs fn(0..n-1) across the requested worker count. Each item writes only
/// its own output slot, so the schedule cannot influence any result.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min(static_cast<std::size_t>(std::max(threads, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto body = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Parses "FFFFFF_VVV.json" into (frame, view); returns false otherwise.
bool parse_detection_name(const std::string& name, std::int64_t& frame, int& view) {
  if (name.size() != 15 || name.substr(10) != ".json" || name[6] != '_') return false;
  for (int i = 0; i < 6; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[static_cast<std::size_t>(i)]))) return false;
  }
  for (int i = 7; i < 10; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(name[static_cast<std::size_t>(i)]))) return false;
  }
  frame = std::stoll(name.substr(0, 6));
  view = std::stoi(name.substr(7, 3));
  return true;
}

struct JointSolution {
  FrameStatus status = FrameStatus::insufficient_views;
  Vec3d point = Vec3d::Zero();
  bool condition_warning = false;
};

const std::vector<LandmarkTrajectoryd>& pick_series(const TrajectorySet& set, bool use_smoothed) {
  if (use_smoothed) {
    if (!set.has_smoothed()) {
      throw InputError("trajectory file has no smoothed series; run `smooth` first");
    }
    return set.smoothed;
  }
  return set.raw;
}

int series_frame_count(const std::vector<LandmarkTrajectoryd>& series) {
  if (series.size() != static_cast<std::size_t>(kNumJoints)) {
    throw InputError("expected " + std::to_string(kNumJoints) + " joint trajectories, got " +
                     std::to_string(series.size()));
  }
  const int frames = series.front().frame_count();
  if (frames < 1) throw EmptyTrajectoryError("trajectory series has no frames");
  for (const LandmarkTrajectoryd& traj : series) {
    if (traj.frame_count() != frames) throw InputError("inconsistent per-joint frame counts");
  }
  return frames;
}

std::vector<CameraViewd> sorted_views(std::vector<CameraViewd> views) {
  if (views.empty()) throw InputError("no camera views");
  std::sort(views.begin(), views.end(),
            [](const CameraViewd& a, const CameraViewd& b) { return a.view_id < b.view_id; });
  return views;
}

BoundingBoxd series_bounds(const std::vector<LandmarkTrajectoryd>& series,
                           const std::vector<CameraViewd>& views) {
  BoundingBoxd bounds = BoundingBoxd::empty();
  for (const LandmarkTrajectoryd& traj : series) {
    for (std::size_t t = 0; t < traj.positions.size(); ++t) {
      if (traj.valid.empty() || traj.valid[t]) bounds.expand(traj.positions[t]);
    }
  }
  for (const CameraViewd& view : views) bounds.expand(view.translation);
  if (!bounds.valid()) throw InputError("could not establish a normalization box");
  return bounds;
}

json report_to_json(const RunReport& report) {
  json doc;
  doc["sequence_id"] = report.sequence_id;
  doc["first_frame"] = report.first_frame;
  doc["frame_count"] = report.frame_count;
  doc["view_count"] = report.view_count;
  doc["detections_read"] = report.detections_read;
  doc["detections_used"] = report.detections_used;
  doc["triangulated_ok"] = report.triangulated_ok;
  doc["insufficient_views"] = report.insufficient_views;
  doc["degenerate_geometry"] = report.degenerate_geometry;
  doc["condition_warnings"] = report.condition_warnings;
  doc["synthesized"] = report.synthesized;
  doc["empty_joints"] = report.empty_joints;
  json issues = json::array();
  for (const FileIssue& issue : report.file_issues) {
    json entry;
    entry["frame"] = issue.frame_id;
    entry["view"] = issue.view_id;
    entry["path"] = issue.path;
    entry["message"] = issue.message;
    issues.push_back(std::move(entry));
  }
  doc["file_issues"] = std::move(issues);
  doc["warnings"] = report.warnings;
  if (report.mpjpe_raw) doc["mpjpe_raw"] = *report.mpjpe_raw;
  if (report.mpjpe_smoothed) doc["mpjpe_smoothed"] = *report.mpjpe_smoothed;
  return doc;
}

}  // namespace

std::string RunReport::to_json() const { return report_to_json(*this).dump(2) + "\n"; }

void infer_frame_range(SequenceManifest& manifest) {
  if (manifest.frame_count > 0) return;
  if (!std::filesystem::is_directory(manifest.detection_dir)) {
    throw IoError("detection directory not found: " + manifest.detection_dir.string());
  }
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const auto& entry : std::filesystem::directory_iterator(manifest.detection_dir)) {
    std::int64_t frame = 0;
    int view = 0;
    if (!entry.is_regular_file()) continue;
    if (!parse_detection_name(entry.path().filename().string(), frame, view)) continue;
    lo = std::min(lo, frame);
    hi = std::max(hi, frame);
  }
  if (hi < lo) {
    throw InputError("no detection files ({frame:06}_{view:03}.json) under " +
                     manifest.detection_dir.string());
  }
  manifest.first_frame = lo;
  manifest.frame_count = static_cast<int>(hi - lo + 1);
}

TriangulationStageOutput triangulate_sequence(const SequenceManifest& manifest_in,
                                              const PipelineConfig& config) {
  SequenceManifest manifest = manifest_in;
  infer_frame_range(manifest);

  std::vector<CameraViewd> views = read_calibration(manifest.calibration_path);
  if (!manifest.view_ids.empty()) {
    std::vector<CameraViewd> selected;
    for (int id : manifest.view_ids) {
      const auto it = std::find_if(views.begin(), views.end(),
                                   [id](const CameraViewd& v) { return v.view_id == id; });
      if (it == views.end()) {
        throw InputError("manifest references view " + std::to_string(id) +
                         " absent from the calibration");
      }
      selected.push_back(*it);
    }
    views = std::move(selected);
  }
  views = sorted_views(std::move(views));

  TriangulationStageOutput out;
  RunReport& report = out.report;
  report.sequence_id = manifest.sequence_id;
  report.first_frame = manifest.first_frame;
  report.frame_count = manifest.frame_count;
  report.view_count = static_cast<int>(views.size());

  // Ingest (serial: deterministic warning order, trivially IO-bound).
  const std::size_t frame_count = static_cast<std::size_t>(manifest.frame_count);
  std::vector<std::vector<Detection2Dd>> per_frame(frame_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    const std::int64_t frame_id = manifest.first_frame + static_cast<std::int64_t>(f);
    for (const CameraViewd& view : views) {
      const std::filesystem::path path =
          manifest.detection_dir / (frame_view_stem(frame_id, view.view_id) + ".json");
      if (!std::filesystem::exists(path)) continue;  // view saw nothing this frame
      try {
        OpenPoseParseResult parsed =
            read_openpose_frame(path, static_cast<int>(frame_id), view.view_id);
        if (!parsed.warning.empty()) {
          report.warnings.push_back(path.filename().string() + ": " + parsed.warning);
        }
        report.detections_read += static_cast<std::int64_t>(parsed.detections.size());
        for (const Detection2Dd& det : parsed.detections) {
          if (det.confidence >= config.lm.weight_threshold) ++report.detections_used;
        }
        std::move(parsed.detections.begin(), parsed.detections.end(),
                  std::back_inserter(per_frame[f]));
      } catch (const ParseError& e) {
        report.file_issues.push_back(FileIssue{frame_id, view.view_id, path.string(), e.what()});
      }
    }
  }

  // Triangulate every (frame, joint); each item owns one output slot.
  std::vector<JointSolution> solutions(frame_count * kNumJoints);
  parallel_for(frame_count, config.threads, [&](std::size_t f) {
    std::vector<Detection2Dd> joint_dets;
    for (int j = 0; j < kNumJoints; ++j) {
      joint_dets.clear();
      for (const Detection2Dd& det : per_frame[f]) {
        if (det.joint_id == j) joint_dets.push_back(det);
      }
      const FrameTriangulation<double> frame = triangulate_frame(joint_dets, views, config.lm);
      JointSolution& slot = solutions[f * kNumJoints + static_cast<std::size_t>(j)];
      slot.status = frame.status;
      if (frame.valid()) {
        slot.point = frame.result.point;
        slot.condition_warning = frame.result.condition_warning;
      }
    }
  });

  for (const JointSolution& slot : solutions) {
    switch (slot.status) {
      case FrameStatus::ok:
        ++report.triangulated_ok;
        if (slot.condition_warning) ++report.condition_warnings;
        break;
      case FrameStatus::insufficient_views:
        ++report.insufficient_views;
        break;
      case FrameStatus::degenerate_geometry:
        ++report.degenerate_geometry;
        break;
    }
  }

  // Per-joint trajectories; gaps filled where possible.
  TrajectorySet& set = out.trajectories;
  set.first_frame = manifest.first_frame;
  set.frame_rate = manifest.frame_rate;
  set.raw.resize(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    LandmarkTrajectoryd traj;
    traj.joint_id = j;
    traj.frame_rate = manifest.frame_rate;
    traj.positions.resize(frame_count, Vec3d::Zero());
    traj.valid.assign(frame_count, 0);
    traj.synthesized.assign(frame_count, 0);
    bool any_valid = false;
    for (std::size_t f = 0; f < frame_count; ++f) {
      const JointSolution& slot = solutions[f * kNumJoints + static_cast<std::size_t>(j)];
      if (slot.status == FrameStatus::ok) {
        traj.positions[f] = slot.point;
        traj.valid[f] = 1;
        any_valid = true;
      }
    }
    if (any_valid) {
      traj = fill_gaps(traj);
      for (std::uint8_t s : traj.synthesized) report.synthesized += s;
    } else {
      report.empty_joints.push_back(j);
    }
    set.raw[static_cast<std::size_t>(j)] = std::move(traj);
  }

  if (report.empty_joints.size() == static_cast<std::size_t>(kNumJoints)) {
    throw EmptyTrajectoryError("no landmark could be triangulated in any frame");
  }
  return out;
}

TokenFile tokenize_trajectories(const TrajectorySet& set, bool use_smoothed,
                                const std::vector<CameraViewd>& views_in,
                                const RotationEncodingConfig& rot_cfg,
                                const FourierConfig& fourier_cfg,
                                const std::optional<BoundingBoxd>& bounds_override, int threads) {
  const std::vector<LandmarkTrajectoryd>& series = pick_series(set, use_smoothed);
  const std::size_t frame_count = static_cast<std::size_t>(series_frame_count(series));
  const std::vector<CameraViewd> views = sorted_views(views_in);

  TokenFile file;
  file.first_frame = set.first_frame;
  file.bounds = bounds_override ? *bounds_override : series_bounds(series, views);
  if (!file.bounds.valid()) throw InputError("tokenize: invalid normalization box");
  for (const CameraViewd& view : views) file.view_ids.push_back(view.view_id);

  // Invalid (never-triangulated) joints sit at the box center, which encodes
  // as the neutral zero-input pattern after normalization.
  const Vec3d center = 0.5 * (file.bounds.min + file.bounds.max);
  std::vector<std::vector<Vec3d>> landmarks(frame_count,
                                            std::vector<Vec3d>(kNumJoints, center));
  for (std::size_t f = 0; f < frame_count; ++f) {
    for (int j = 0; j < kNumJoints; ++j) {
      const LandmarkTrajectoryd& traj = series[static_cast<std::size_t>(j)];
      if (traj.valid.empty() || traj.valid[f]) {
        landmarks[f][static_cast<std::size_t>(j)] = traj.positions[f];
      }
    }
  }

  const std::size_t view_count = views.size();
  file.blocks.resize(frame_count * view_count);
  parallel_for(frame_count * view_count, threads, [&](std::size_t i) {
    const std::size_t f = i / view_count;
    const std::size_t v = i % view_count;
    ConditioningTokenSet block =
        assemble_tokens(views[v], landmarks[f], rot_cfg, fourier_cfg, file.bounds);
    block.frame_id = file.first_frame + static_cast<std::int64_t>(f);
    file.blocks[i] = block;
  });
  return file;
}

void render_map_files(const TrajectorySet& set, bool use_smoothed,
                      const std::vector<CameraViewd>& views_in, const SkeletonMapConfig& config,
                      const std::filesystem::path& out_dir, int threads) {
  config.validate();
  const std::vector<LandmarkTrajectoryd>& series = pick_series(set, use_smoothed);
  const std::size_t frame_count = static_cast<std::size_t>(series_frame_count(series));
  const std::vector<CameraViewd> views = sorted_views(views_in);
  const std::size_t view_count = views.size();

  // Invalid joints go to NaN so every limb touching them clips away.
  constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<Vec3d>> landmarks(
      frame_count, std::vector<Vec3d>(kNumJoints, Vec3d::Constant(kNan)));
  for (std::size_t f = 0; f < frame_count; ++f) {
    for (int j = 0; j < kNumJoints; ++j) {
      const LandmarkTrajectoryd& traj = series[static_cast<std::size_t>(j)];
      if (traj.valid.empty() || traj.valid[f]) {
        landmarks[f][static_cast<std::size_t>(j)] = traj.positions[f];
      }
    }
  }

  std::filesystem::create_directories(out_dir);
  const std::size_t total = frame_count * view_count;
  const std::size_t batch = 64;  // bounds renderer memory; writes stay serial
  std::vector<Image8> images(std::min(batch, total));
  for (std::size_t start = 0; start < total; start += batch) {
    const std::size_t n = std::min(batch, total - start);
    parallel_for(n, threads, [&](std::size_t i) {
      const std::size_t f = (start + i) / view_count;
      const std::size_t v = (start + i) % view_count;
      images[i] = render_skeleton_map(views[v], landmarks[f], config);
    });
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t f = (start + i) / view_count;
      const std::size_t v = (start + i) % view_count;
      const std::int64_t frame_id = set.first_frame + static_cast<std::int64_t>(f);
      write_ppm(out_dir / (frame_view_stem(frame_id, views[v].view_id) + ".ppm"), images[i]);
    }
  }
}

RunReport run_pipeline(const SequenceManifest& manifest_in, const PipelineConfig& config) {
  const auto start_time = std::chrono::steady_clock::now();
  config.validate();
  SequenceManifest manifest = manifest_in;
  infer_frame_range(manifest);

  TriangulationStageOutput stage = triangulate_sequence(manifest, config);
  RunReport& report = stage.report;
  TrajectorySet& set = stage.trajectories;

  // Smooth every joint that has data; empty joints stay all-invalid.
  const SGFilterSpecd filter = sg_coefficients(config.sg_half_window, config.sg_degree);
  std::vector<bool> is_empty(kNumJoints, false);
  for (int j : report.empty_joints) is_empty[static_cast<std::size_t>(j)] = true;
  set.smoothed.resize(kNumJoints);
  parallel_for(static_cast<std::size_t>(kNumJoints), config.threads, [&](std::size_t j) {
    set.smoothed[j] = is_empty[j] ? set.raw[j] : smooth_trajectory(set.raw[j], filter);
  });

  std::filesystem::create_directories(config.output_dir);
  write_trajectories(config.output_dir / "trajectory.json", set);

  std::vector<CameraViewd> views = read_calibration(manifest.calibration_path);
  if (!manifest.view_ids.empty()) {
    std::erase_if(views, [&](const CameraViewd& v) {
      return std::find(manifest.view_ids.begin(), manifest.view_ids.end(), v.view_id) ==
             manifest.view_ids.end();
    });
  }

  if (config.emit_tokens) {
    const TokenFile tokens = tokenize_trajectories(set, true, views, config.rotation,
                                                   config.fourier, manifest.bounds, config.threads);
    write_tokens(config.output_dir / "tokens.bin", tokens);
  }
  if (config.emit_maps) {
    render_map_files(set, true, views, config.map, config.output_dir / "maps", config.threads);
  }

  if (!manifest.ground_truth_path.empty()) {
    const TrajectorySet truth = read_trajectories(manifest.ground_truth_path);
    report.mpjpe_raw = mpjpe(set.raw, truth.raw);
    report.mpjpe_smoothed = mpjpe(set.smoothed, truth.raw);
  }

  write_file(config.output_dir / "report.json", report.to_json());

  const auto elapsed = std::chrono::steady_clock::now() - start_time;
  report.elapsed_seconds = std::chrono::duration<double>(elapsed).count();
  json timing;
  timing["elapsed_seconds"] = report.elapsed_seconds;
  timing["threads"] = config.threads;
  write_file(config.output_dir / "timing.json", timing.dump(2) + "\n");

  return report;
}

}  // namespace mvlm
