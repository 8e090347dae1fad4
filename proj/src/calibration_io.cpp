#include <set>
#include <string>

#include "mvlm/camera.hpp"
#include "mvlm/io.hpp"
#include "json_util.hpp"

namespace mvlm {

namespace {

using detail::as_integer;
using detail::as_number;
using detail::json;
using detail::require;

Mat3d parse_mat3(const json& value, const std::string& context) {
  if (!value.is_array() || value.size() != 3) {
    throw ParseError(context + ": expected 3 rows");
  }
  Mat3d m;
  for (int r = 0; r < 3; ++r) {
    const json& row = value[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != 3) {
      throw ParseError(context + ": row " + std::to_string(r) + " must hold 3 numbers");
    }
    for (int c = 0; c < 3; ++c) {
      m(r, c) = as_number(row[static_cast<std::size_t>(c)], context);
    }
  }
  return m;
}

Vec3d parse_vec3(const json& value, const std::string& context) {
  if (!value.is_array() || value.size() != 3) {
    throw ParseError(context + ": expected 3 numbers");
  }
  Vec3d v;
  for (int c = 0; c < 3; ++c) v[c] = as_number(value[static_cast<std::size_t>(c)], context);
  return v;
}

json mat3_to_json(const Mat3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) {
    rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  }
  return rows;
}

}  // namespace

std::vector<CameraViewd> parse_calibration(const std::string& bytes) {
  const json doc = detail::parse_json(bytes, "calibration");
  const json& format = require(doc, "format", "calibration");
  if (!format.is_string() || format.get<std::string>() != "mvlm-calibration") {
    throw ParseError("calibration: unrecognized format tag");
  }
  if (as_integer(require(doc, "version", "calibration"), "calibration version") != 1) {
    throw ParseError("calibration: unsupported version");
  }

  const json& cameras = require(doc, "cameras", "calibration");
  if (!cameras.is_array() || cameras.empty()) {
    throw ParseError("calibration: 'cameras' must be a non-empty array");
  }

  std::vector<CameraViewd> views;
  views.reserve(cameras.size());
  std::set<int> seen_ids;
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    const std::string context = "calibration camera " + std::to_string(i);
    const json& entry = cameras[i];
    CameraViewd view;
    view.view_id = static_cast<int>(as_integer(require(entry, "view_id", context), context + " view_id"));
    const json& size = require(entry, "image_size", context);
    if (!size.is_array() || size.size() != 2) {
      throw ParseError(context + ": image_size must hold [width, height]");
    }
    view.image_size.x() = static_cast<int>(as_integer(size[0], context + " image_size"));
    view.image_size.y() = static_cast<int>(as_integer(size[1], context + " image_size"));
    view.intrinsics = parse_mat3(require(entry, "intrinsics", context), context + " intrinsics");
    view.rotation = parse_mat3(require(entry, "rotation", context), context + " rotation");
    view.translation = parse_vec3(require(entry, "translation", context), context + " translation");

    if (!seen_ids.insert(view.view_id).second) {
      throw CalibrationError("calibration: duplicate view_id " + std::to_string(view.view_id));
    }
    try {
      validate(view);
    } catch (const CalibrationError& e) {
      throw CalibrationError("view " + std::to_string(view.view_id) + ": " + e.what());
    }
    views.push_back(view);
  }
  return views;
}

std::vector<CameraViewd> read_calibration(const std::filesystem::path& path) {
  try {
    return parse_calibration(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.byte_offset);
  } catch (const CalibrationError& e) {
    throw CalibrationError(path.string() + ": " + e.what());
  }
}

void write_calibration(const std::filesystem::path& path, const std::vector<CameraViewd>& views) {
  json cameras = json::array();
  for (const CameraViewd& view : views) {
    json entry;
    entry["view_id"] = view.view_id;
    entry["image_size"] = json::array({view.image_size.x(), view.image_size.y()});
    entry["intrinsics"] = mat3_to_json(view.intrinsics);
    entry["rotation"] = mat3_to_json(view.rotation);
    entry["translation"] = json::array({view.translation.x(), view.translation.y(), view.translation.z()});
    cameras.push_back(std::move(entry));
  }
  json doc;
  doc["format"] = "mvlm-calibration";
  doc["version"] = 1;
  doc["cameras"] = std::move(cameras);
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace mvlm
