#include <string>

#include "mvlm/io.hpp"
#include "json_util.hpp"

namespace mvlm {

namespace {

using detail::as_integer;
using detail::as_number;
using detail::json;
using detail::require;

json raw_frame_entry(const LandmarkTrajectoryd& traj, std::size_t t) {
  const bool valid = traj.valid.empty() || traj.valid[t];
  const bool synthesized = !traj.synthesized.empty() && traj.synthesized[t];
  // Invalid frames carry no meaningful position; zero keeps the file tidy.
  const Vec3d p = valid ? traj.positions[t] : Vec3d::Zero();
  return json::array({p.x(), p.y(), p.z(), valid, synthesized});
}

LandmarkTrajectoryd parse_joint_raw(const json& frames, int joint_id, double frame_rate,
                                    const std::string& context) {
  if (!frames.is_array()) {
    throw ParseError(context + ": 'raw' must be an array");
  }
  LandmarkTrajectoryd traj;
  traj.joint_id = joint_id;
  traj.frame_rate = frame_rate;
  traj.positions.reserve(frames.size());
  traj.valid.reserve(frames.size());
  traj.synthesized.reserve(frames.size());
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& entry = frames[t];
    if (!entry.is_array() || entry.size() != 5 || !entry[3].is_boolean() || !entry[4].is_boolean()) {
      throw ParseError(context + ": frame " + std::to_string(t) +
                       " must be [x, y, z, valid, synthesized]");
    }
    Vec3d p;
    for (int c = 0; c < 3; ++c) p[c] = as_number(entry[static_cast<std::size_t>(c)], context);
    traj.positions.push_back(p);
    traj.valid.push_back(entry[3].get<bool>() ? 1 : 0);
    traj.synthesized.push_back(entry[4].get<bool>() ? 1 : 0);
  }
  return traj;
}

LandmarkTrajectoryd parse_joint_smoothed(const json& frames, const LandmarkTrajectoryd& raw,
                                         const std::string& context) {
  if (!frames.is_array() || frames.size() != raw.positions.size()) {
    throw ParseError(context + ": 'smoothed' must match the raw frame count");
  }
  LandmarkTrajectoryd traj = raw;  // inherit flags and metadata
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const json& entry = frames[t];
    if (!entry.is_array() || entry.size() != 3) {
      throw ParseError(context + ": smoothed frame " + std::to_string(t) + " must be [x, y, z]");
    }
    for (int c = 0; c < 3; ++c) {
      traj.positions[t][c] = as_number(entry[static_cast<std::size_t>(c)], context);
    }
  }
  return traj;
}

}  // namespace

void write_trajectories(const std::filesystem::path& path, const TrajectorySet& set) {
  if (set.raw.empty()) {
    throw EmptyTrajectoryError("write_trajectories: no joints");
  }
  const std::size_t frame_count = set.raw.front().positions.size();
  if (set.has_smoothed() && set.smoothed.size() != set.raw.size()) {
    throw InputError("write_trajectories: smoothed joint count does not match raw");
  }

  json joints = json::array();
  for (std::size_t j = 0; j < set.raw.size(); ++j) {
    const LandmarkTrajectoryd& traj = set.raw[j];
    if (traj.positions.size() != frame_count) {
      throw InputError("write_trajectories: joint " + std::to_string(traj.joint_id) +
                       " has inconsistent frame count");
    }
    json entry;
    entry["joint_id"] = traj.joint_id;
    json frames = json::array();
    for (std::size_t t = 0; t < frame_count; ++t) frames.push_back(raw_frame_entry(traj, t));
    entry["raw"] = std::move(frames);
    if (set.has_smoothed()) {
      const LandmarkTrajectoryd& smoothed = set.smoothed[j];
      if (smoothed.positions.size() != frame_count) {
        throw InputError("write_trajectories: smoothed joint " + std::to_string(traj.joint_id) +
                         " has inconsistent frame count");
      }
      json sm = json::array();
      for (std::size_t t = 0; t < frame_count; ++t) {
        const bool valid = smoothed.valid.empty() || smoothed.valid[t];
        const Vec3d p = valid ? smoothed.positions[t] : Vec3d::Zero();
        sm.push_back(json::array({p.x(), p.y(), p.z()}));
      }
      entry["smoothed"] = std::move(sm);
    }
    joints.push_back(std::move(entry));
  }

  json doc;
  doc["format"] = "mvlm-trajectory";
  doc["version"] = 1;
  doc["joint_count"] = set.raw.size();
  doc["frame_count"] = frame_count;
  doc["first_frame"] = set.first_frame;
  doc["frame_rate"] = set.frame_rate;
  doc["joints"] = std::move(joints);
  write_file(path, doc.dump(2) + "\n");
}

TrajectorySet parse_trajectories(const std::string& bytes) {
  const std::string context = "trajectory";
  const json doc = detail::parse_json(bytes, context);
  const json& format = require(doc, "format", context);
  if (!format.is_string() || format.get<std::string>() != "mvlm-trajectory") {
    throw ParseError(context + ": unrecognized format tag");
  }
  if (as_integer(require(doc, "version", context), context + " version") != 1) {
    throw ParseError(context + ": unsupported version");
  }

  TrajectorySet set;
  set.first_frame = as_integer(require(doc, "first_frame", context), context + " first_frame");
  set.frame_rate = as_number(require(doc, "frame_rate", context), context + " frame_rate");
  const std::int64_t joint_count =
      as_integer(require(doc, "joint_count", context), context + " joint_count");
  const std::int64_t frame_count =
      as_integer(require(doc, "frame_count", context), context + " frame_count");

  const json& joints = require(doc, "joints", context);
  if (!joints.is_array() || static_cast<std::int64_t>(joints.size()) != joint_count) {
    throw ParseError(context + ": 'joints' must hold joint_count entries");
  }

  bool any_smoothed = false;
  for (std::size_t j = 0; j < joints.size(); ++j) {
    const std::string joint_context = context + " joint " + std::to_string(j);
    const json& entry = joints[j];
    const int joint_id =
        static_cast<int>(as_integer(require(entry, "joint_id", joint_context), joint_context));
    LandmarkTrajectoryd raw = parse_joint_raw(require(entry, "raw", joint_context), joint_id,
                                              set.frame_rate, joint_context);
    if (static_cast<std::int64_t>(raw.positions.size()) != frame_count) {
      throw ParseError(joint_context + ": frame count mismatch");
    }
    if (entry.contains("smoothed")) {
      any_smoothed = true;
      set.smoothed.push_back(parse_joint_smoothed(entry["smoothed"], raw, joint_context));
    } else if (any_smoothed) {
      throw ParseError(context + ": 'smoothed' present for some joints but not all");
    }
    set.raw.push_back(std::move(raw));
  }
  if (any_smoothed && set.smoothed.size() != set.raw.size()) {
    throw ParseError(context + ": 'smoothed' present for some joints but not all");
  }
  return set;
}

TrajectorySet read_trajectories(const std::filesystem::path& path) {
  try {
    return parse_trajectories(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte_offset);
  }
}

}  // namespace mvlm
