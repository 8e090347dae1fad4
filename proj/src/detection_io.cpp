#include <algorithm>
#include <string>

#include "mvlm/io.hpp"
#include "json_util.hpp"

namespace mvlm {

namespace {

using detail::as_number;
using detail::json;
using detail::require;

constexpr std::size_t kTripleCount = static_cast<std::size_t>(kNumJoints) * 3;

double person_total_confidence(const json& person, const std::string& context) {
  const json& keypoints = require(person, "pose_keypoints_2d", context);
  if (!keypoints.is_array() || keypoints.size() != kTripleCount) {
    throw ParseError(context + ": pose_keypoints_2d must hold " + std::to_string(kTripleCount) +
                     " values, got " + std::to_string(keypoints.size()));
  }
  double total = 0.0;
  for (std::size_t k = 2; k < keypoints.size(); k += 3) {
    total += as_number(keypoints[k], context + " confidence");
  }
  return total;
}

}  // namespace

OpenPoseParseResult parse_openpose_frame(const std::string& bytes, int frame_id, int view_id) {
  const std::string context = "detections";
  const json doc = detail::parse_json(bytes, context);
  const json& people = require(doc, "people", context);
  if (!people.is_array()) {
    throw ParseError(context + ": 'people' must be an array");
  }

  OpenPoseParseResult result;
  if (people.empty()) {
    return result;  // detector saw nobody; not an error
  }

  std::size_t chosen = 0;
  if (people.size() > 1) {
    double best = -1.0;
    for (std::size_t p = 0; p < people.size(); ++p) {
      const double total =
          person_total_confidence(people[p], context + " person " + std::to_string(p));
      if (total > best) {
        best = total;
        chosen = p;
      }
    }
    result.warning = "multi-person frame: kept person " + std::to_string(chosen) + " of " +
                     std::to_string(people.size()) + " (highest total confidence)";
  }

  const std::string person_context = context + " person " + std::to_string(chosen);
  const json& keypoints = require(people[chosen], "pose_keypoints_2d", person_context);
  if (!keypoints.is_array() || keypoints.size() != kTripleCount) {
    throw ParseError(person_context + ": pose_keypoints_2d must hold " +
                     std::to_string(kTripleCount) + " values, got " +
                     std::to_string(keypoints.size()));
  }

  result.detections.reserve(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    const std::size_t base = static_cast<std::size_t>(j) * 3;
    Detection2Dd det;
    det.pixel.x() = as_number(keypoints[base], person_context + " x");
    det.pixel.y() = as_number(keypoints[base + 1], person_context + " y");
    det.confidence = std::clamp(as_number(keypoints[base + 2], person_context + " confidence"), 0.0, 1.0);
    det.joint_id = j;
    det.view_id = view_id;
    det.frame_id = frame_id;
    result.detections.push_back(det);
  }
  return result;
}

OpenPoseParseResult read_openpose_frame(const std::filesystem::path& path, int frame_id,
                                        int view_id) {
  try {
    return parse_openpose_frame(read_file(path), frame_id, view_id);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte_offset);
  }
}

void write_openpose_frame(const std::filesystem::path& path,
                          const std::vector<Detection2Dd>& detections) {
  // Undetected joints take the detector's missing-joint convention (0, 0, 0).
  std::vector<double> triples(kTripleCount, 0.0);
  for (const Detection2Dd& det : detections) {
    if (det.joint_id < 0 || det.joint_id >= kNumJoints) {
      throw InputError("write_openpose_frame: joint_id out of range: " +
                       std::to_string(det.joint_id));
    }
    const std::size_t base = static_cast<std::size_t>(det.joint_id) * 3;
    triples[base] = det.pixel.x();
    triples[base + 1] = det.pixel.y();
    triples[base + 2] = det.confidence;
  }
  json person;
  person["pose_keypoints_2d"] = triples;
  json doc;
  doc["version"] = 1.3;
  doc["people"] = json::array({std::move(person)});
  write_file(path, doc.dump() + "\n");
}

}  // namespace mvlm
