#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvlm/encoding.hpp"
#include "mvlm/io.hpp"
#include "mvlm/skeleton_map.hpp"
#include "mvlm/triangulation.hpp"
#include "mvlm/types.hpp"

namespace mvlm {

/// Input bookkeeping for one sequence. Detection files live in
/// detection_dir under the {frame:06}_{view:03}.json convention; a missing
/// file simply means that view saw nothing that frame.
struct SequenceManifest {
  std::string sequence_id = "sequence";
  std::int64_t first_frame = 0;
  int frame_count = 0;  // <= 0: infer from the detection directory
  std::vector<int> view_ids;  // empty: every calibrated view
  std::filesystem::path calibration_path;
  std::filesystem::path detection_dir;
  std::optional<BoundingBoxd> bounds;  // else computed from the sequence
  std::filesystem::path ground_truth_path;  // optional; enables report MPJPE
  double frame_rate = 30.0;
};

struct PipelineConfig {
  LMConfig lm;
  int sg_half_window = 5;
  int sg_degree = 3;
  RotationEncodingConfig rotation;
  FourierConfig fourier;
  SkeletonMapConfig map;
  std::filesystem::path output_dir;
  int threads = 1;
  bool emit_tokens = true;
  bool emit_maps = true;

  void validate() const {
    if (threads < 1) throw ConfigError("pipeline: threads must be >= 1");
    if (output_dir.empty()) throw ConfigError("pipeline: output directory is required");
    rotation.validate();
    fourier.validate();
    map.validate();
  }
};

/// One recoverable per-file ingestion failure (the run continues without it).
struct FileIssue {
  std::int64_t frame_id = 0;
  int view_id = 0;
  std::string path;
  std::string message;
};

/// Deterministic run summary, serialized as report.json. Wall-clock timing
/// is written separately (timing.json) so the report stays byte-reproducible.
struct RunReport {
  std::string sequence_id;
  std::int64_t first_frame = 0;
  int frame_count = 0;
  int view_count = 0;
  std::int64_t detections_read = 0;
  std::int64_t detections_used = 0;  // confidence >= tau
  std::int64_t triangulated_ok = 0;
  std::int64_t insufficient_views = 0;
  std::int64_t degenerate_geometry = 0;
  std::int64_t condition_warnings = 0;
  std::int64_t synthesized = 0;  // gap-filled (joint, frame) pairs
  std::vector<int> empty_joints;  // joints with no valid frame at all
  std::vector<FileIssue> file_issues;
  std::vector<std::string> warnings;  // e.g. multi-person resolutions
  std::optional<double> mpjpe_raw;       // present when ground truth given
  std::optional<double> mpjpe_smoothed;
  double elapsed_seconds = 0.0;  // goes to timing.json only

  std::string to_json() const;  // deterministic bytes (timing excluded)
};

/// Full pipeline: ingest detections, triangulate every (frame, joint), fill
/// gaps, smooth, then emit trajectory.json, tokens.bin, skeleton maps, and
/// report.json under config.output_dir. Per-frame problems are recorded in
/// the report, never fatal; an entirely empty result (no valid landmark
/// anywhere) raises EmptyTrajectoryError.
RunReport run_pipeline(const SequenceManifest& manifest, const PipelineConfig& config);

/// Triangulation stage only (used by the `triangulate` command).
struct TriangulationStageOutput {
  TrajectorySet trajectories;  // raw series only
  RunReport report;            // counts up to the triangulation stage
};

TriangulationStageOutput triangulate_sequence(const SequenceManifest& manifest,
                                              const PipelineConfig& config);

/// Token assembly over a whole trajectory series (used by `tokenize` and the
/// full run). Joints with no valid frame encode as the box-center neutral
/// pattern; the box defaults to landmarks plus camera translations.
TokenFile tokenize_trajectories(const TrajectorySet& set, bool use_smoothed,
                                const std::vector<CameraViewd>& views,
                                const RotationEncodingConfig& rot_cfg,
                                const FourierConfig& fourier_cfg,
                                const std::optional<BoundingBoxd>& bounds_override, int threads);

/// One skeleton map per (frame, view) under out_dir, named
/// {frame:06}_{view:03}.ppm (used by `render-maps` and the full run).
void render_map_files(const TrajectorySet& set, bool use_smoothed,
                      const std::vector<CameraViewd>& views, const SkeletonMapConfig& config,
                      const std::filesystem::path& out_dir, int threads);

/// Scans detection_dir for {frame:06}_{view:03}.json files and fills in
/// first_frame / frame_count when unset. Throws InputError when nothing
/// matches and no explicit range was given.
void infer_frame_range(SequenceManifest& manifest);

}  // namespace mvlm
