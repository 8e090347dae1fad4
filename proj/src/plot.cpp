#include <algorithm>
#include <iomanip>
#include <sstream>
#include <string>

#include "mvlm/body25.hpp"
#include "mvlm/plot.hpp"

namespace mvlm {

namespace {

constexpr double kPanelWidth = 340.0;
constexpr double kPanelHeight = 72.0;
constexpr double kPanelGapX = 24.0;
constexpr double kPanelGapY = 14.0;
constexpr double kMarginLeft = 36.0;
constexpr double kMarginTop = 34.0;
constexpr char kAxisNames[3] = {'x', 'y', 'z'};

std::string fmt(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;

  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

// Polyline over the valid frames of one coordinate trace.
std::string polyline(const LandmarkTrajectoryd& traj, int axis, const Range& range, double x0,
                     double y0, int frame_count, const char* css_class) {
  const double x_scale = frame_count > 1 ? kPanelWidth / (frame_count - 1) : 0.0;
  const double span = range.hi - range.lo;
  const double y_scale = span > 0.0 ? kPanelHeight / span : 0.0;

  std::ostringstream out;
  out << "  <polyline class=\"" << css_class << "\" points=\"";
  bool first = true;
  for (int t = 0; t < frame_count; ++t) {
    const std::size_t ti = static_cast<std::size_t>(t);
    if (!traj.valid.empty() && !traj.valid[ti]) continue;
    const double px = x0 + x_scale * t;
    const double py = y0 + kPanelHeight - y_scale * (traj.positions[ti][axis] - range.lo);
    if (!first) out << ' ';
    out << fmt(px) << ',' << fmt(py);
    first = false;
  }
  out << "\"/>\n";
  return first ? std::string() : out.str();  // no valid frames: omit the element
}

}  // namespace

std::string render_plot(const TrajectorySet& set) {
  if (set.raw.empty() || set.raw.front().positions.empty()) {
    throw EmptyTrajectoryError("render_plot: trajectory set has no frames");
  }
  const int joint_count = static_cast<int>(set.raw.size());
  const int frame_count = set.raw.front().frame_count();

  const double width = kMarginLeft + 3 * (kPanelWidth + kPanelGapX);
  const double height = kMarginTop + joint_count * (kPanelHeight + kPanelGapY);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\">\n"
      << "<style>\n"
      << ".raw{fill:none;stroke:#c0392b;stroke-width:0.8;opacity:0.75}\n"
      << ".smoothed{fill:none;stroke:#1a7a4a;stroke-width:1.4}\n"
      << ".panel{fill:none;stroke:#999;stroke-width:0.5}\n"
      << "text{font-family:monospace;font-size:10px;fill:#333}\n"
      << "</style>\n"
      << "<text x=\"" << fmt(kMarginLeft) << "\" y=\"16\">landmark trajectories: raw (red) vs "
      << "smoothed (green), frames " << set.first_frame << ".."
      << (set.first_frame + frame_count - 1) << "</text>\n";

  for (int j = 0; j < joint_count; ++j) {
    const LandmarkTrajectoryd& raw = set.raw[static_cast<std::size_t>(j)];
    const char* joint_name = raw.joint_id >= 0 && raw.joint_id < kNumJoints
                                 ? body25::kJointNames[static_cast<std::size_t>(raw.joint_id)].data()
                                 : "?";
    for (int axis = 0; axis < 3; ++axis) {
      const double x0 = kMarginLeft + axis * (kPanelWidth + kPanelGapX);
      const double y0 = kMarginTop + j * (kPanelHeight + kPanelGapY);

      Range range;
      bool any = false;
      for (int t = 0; t < frame_count; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        if (!raw.valid.empty() && !raw.valid[ti]) continue;
        const double v = raw.positions[ti][axis];
        if (!any) range = Range{v, v};
        else range.expand(v);
        any = true;
      }
      if (set.has_smoothed()) {
        const LandmarkTrajectoryd& sm = set.smoothed[static_cast<std::size_t>(j)];
        for (int t = 0; t < frame_count; ++t) {
          const std::size_t ti = static_cast<std::size_t>(t);
          if (!sm.valid.empty() && !sm.valid[ti]) continue;
          const double v = sm.positions[ti][axis];
          if (!any) range = Range{v, v};
          else range.expand(v);
          any = true;
        }
      }
      const double pad = std::max(1e-6, 0.05 * (range.hi - range.lo));
      range.lo -= pad;
      range.hi += pad;

      svg << "  <rect class=\"panel\" x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
          << fmt(kPanelWidth) << "\" height=\"" << fmt(kPanelHeight) << "\"/>\n"
          << "  <text x=\"" << fmt(x0 + 3) << "\" y=\"" << fmt(y0 + 11) << "\">" << joint_name
          << '.' << kAxisNames[axis] << "</text>\n";
      if (any) {
        svg << polyline(raw, axis, range, x0, y0, frame_count, "raw");
        if (set.has_smoothed()) {
          svg << polyline(set.smoothed[static_cast<std::size_t>(j)], axis, range, x0, y0,
                          frame_count, "smoothed");
        }
      }
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plot(const TrajectorySet& set, const std::filesystem::path& output_path) {
  write_file(output_path, render_plot(set));
}

}  // namespace mvlm
