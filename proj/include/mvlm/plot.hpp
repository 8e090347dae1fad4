#pragma once

#include <filesystem>
#include <string>

#include "mvlm/io.hpp"

namespace mvlm {

/// Renders per-joint coordinate-vs-frame traces as a self-contained SVG:
/// one panel per (joint, axis), raw and smoothed series overlaid as
/// stylistically distinct polylines. Throws EmptyTrajectoryError when the
/// set has no frames.
std::string render_plot(const TrajectorySet& set);

void emit_plot(const TrajectorySet& set, const std::filesystem::path& output_path);

}  // namespace mvlm
