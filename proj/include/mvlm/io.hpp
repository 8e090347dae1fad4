#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mvlm/encoding.hpp"
#include "mvlm/savitzky_golay.hpp"
#include "mvlm/types.hpp"

namespace mvlm {

// ------------------------------------------------------------- calibration

/// Parses the multi-camera calibration document (JSON). Missing or malformed
/// fields raise ParseError naming the field; views violating the camera
/// invariants raise CalibrationError naming the view.
std::vector<CameraViewd> parse_calibration(const std::string& bytes);

std::vector<CameraViewd> read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const std::vector<CameraViewd>& views);

// ------------------------------------------------------- detector ingestion

struct OpenPoseParseResult {
  std::vector<Detection2Dd> detections;
  std::string warning;  // non-empty when a multi-person frame was resolved
};

/// Parses one per-image detector JSON document (people -> pose_keypoints_2d
/// as flat x, y, confidence triples, 25 joints). Zero people yields an empty
/// set; multiple people resolve to the highest-total-confidence entry with a
/// warning; zero-confidence joints are preserved with w = 0. Malformed input
/// raises ParseError carrying the byte offset when known.
OpenPoseParseResult parse_openpose_frame(const std::string& bytes, int frame_id = -1,
                                         int view_id = -1);

OpenPoseParseResult read_openpose_frame(const std::filesystem::path& path, int frame_id,
                                        int view_id);

/// Writes detections (one frame, one view) in the detector's JSON layout, so
/// synthetic fixtures are byte-compatible with real detector output.
void write_openpose_frame(const std::filesystem::path& path,
                          const std::vector<Detection2Dd>& detections);

// ------------------------------------------------------------ trajectories

/// A sequence's per-joint 3D series: the raw triangulated positions (with
/// validity/synthesis flags) and, once smoothing has run, the smoothed ones.
struct TrajectorySet {
  std::vector<LandmarkTrajectoryd> raw;
  std::vector<LandmarkTrajectoryd> smoothed;  // empty until smoothing runs
  std::int64_t first_frame = 0;
  double frame_rate = 30.0;

  bool has_smoothed() const { return !smoothed.empty(); }
};

void write_trajectories(const std::filesystem::path& path, const TrajectorySet& set);
TrajectorySet read_trajectories(const std::filesystem::path& path);
TrajectorySet parse_trajectories(const std::string& bytes);

// ------------------------------------------------------------------ tokens

/// Binary token container: frame-major, view-major 27x192 float32 blocks,
/// with the normalization box in the header.
struct TokenFile {
  std::int64_t first_frame = 0;
  std::vector<int> view_ids;  // block order within a frame
  BoundingBoxd bounds;
  std::vector<ConditioningTokenSet> blocks;  // frame-major, view-major

  int frame_count() const {
    return view_ids.empty() ? 0 : static_cast<int>(blocks.size() / view_ids.size());
  }
};

void write_tokens(const std::filesystem::path& path, const TokenFile& file);
TokenFile read_tokens(const std::filesystem::path& path);

// -------------------------------------------------------------------- misc

/// {frame:06}_{view:03} stem shared by detection files and skeleton maps.
std::string frame_view_stem(std::int64_t frame_id, int view_id);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace mvlm
