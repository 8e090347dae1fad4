#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mvlm/camera.hpp"
#include "mvlm/random.hpp"
#include "mvlm/savitzky_golay.hpp"
#include "mvlm/types.hpp"

namespace mvlm {

/// Circular multi-camera rig: cameras evenly spaced on a horizontal circle
/// around the look-at point, all oriented toward it.
struct RigSpec {
  int camera_count = 16;
  double radius = 3.0;                      // world units
  std::vector<double> heights = {1.4};      // cycled across cameras
  Vec3d look_at = Vec3d(0.0, 0.0, 1.0);
  double focal = 420.0;                     // px
  Eigen::Vector2i image_size = Eigen::Vector2i(384, 512);  // (width, height)

  void validate() const {
    if (camera_count < 2) throw ConfigError("rig: camera_count must be >= 2");
    if (!(radius > 0.0)) throw ConfigError("rig: radius must be positive");
    if (heights.empty()) throw ConfigError("rig: heights must be non-empty");
    if (!(focal > 0.0)) throw ConfigError("rig: focal must be positive");
    if (image_size.x() <= 0 || image_size.y() <= 0) throw ConfigError("rig: image size must be positive");
  }
};

/// Seed-deterministic articulated motion: each joint oscillates sinusoidally
/// about a rest offset, with per-joint-per-axis parameters derived from the
/// seed through the counter RNG.
struct MotionSpec {
  int frame_count = 100;
  std::uint64_t seed = 0;
  double frame_rate = 30.0;
  std::array<Vec3d, kNumJoints> rest;      // world-space rest pose
  double amplitude_scale = 0.15;           // world units; 0 freezes the skeleton
  double min_cycles = 0.5;                 // oscillation periods over the clip
  double max_cycles = 3.0;

  MotionSpec();

  void validate() const {
    if (frame_count < 1) throw ConfigError("motion: frame_count must be >= 1");
    if (!(frame_rate > 0.0)) throw ConfigError("motion: frame_rate must be positive");
    if (!(amplitude_scale >= 0.0) || !std::isfinite(amplitude_scale)) {
      throw ConfigError("motion: amplitude_scale must be finite and >= 0");
    }
    if (!(min_cycles <= max_cycles)) throw ConfigError("motion: cycle range is empty");
  }
};

/// Noise/dropout model applied when projecting ground truth into the views.
struct ObservationSpec {
  double pixel_noise_sigma = 0.0;  // px
  double dropout_prob = 0.0;       // [0, 1]
  std::uint64_t seed = 0;
  double confidence_epsilon = 1e-3;  // keeps the confidence model finite at sigma = 0

  void validate() const {
    if (!(pixel_noise_sigma >= 0.0)) throw ConfigError("observe: sigma must be >= 0");
    if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
      throw ConfigError("observe: dropout_prob must lie in [0, 1]");
    }
  }

  /// w = exp(-err^2 / (2 (3 sigma + eps)^2)), clamped to [0, 1].
  double confidence(double pixel_error) const {
    const double scale = 3.0 * pixel_noise_sigma + confidence_epsilon;
    const double w = std::exp(-pixel_error * pixel_error / (2.0 * scale * scale));
    return std::min(1.0, std::max(0.0, w));
  }
};

/// Upright BODY-25 rest pose: person at the origin facing +x, z up,
/// mid-hip at height 1. Units are meters.
inline std::array<Vec3d, kNumJoints> body25_rest_pose() {
  std::array<Vec3d, kNumJoints> rest;
  rest[0] = {0.08, 0.000, 1.70};   // Nose
  rest[1] = {0.00, 0.000, 1.55};   // Neck
  rest[2] = {0.00, -0.220, 1.52};  // RShoulder
  rest[3] = {0.02, -0.300, 1.24};  // RElbow
  rest[4] = {0.05, -0.330, 0.98};  // RWrist
  rest[5] = {0.00, 0.220, 1.52};   // LShoulder
  rest[6] = {0.02, 0.300, 1.24};   // LElbow
  rest[7] = {0.05, 0.330, 0.98};   // LWrist
  rest[8] = {0.00, 0.000, 1.00};   // MidHip
  rest[9] = {0.00, -0.120, 1.00};  // RHip
  rest[10] = {0.00, -0.130, 0.55}; // RKnee
  rest[11] = {0.00, -0.140, 0.12}; // RAnkle
  rest[12] = {0.00, 0.120, 1.00};  // LHip
  rest[13] = {0.00, 0.130, 0.55};  // LKnee
  rest[14] = {0.00, 0.140, 0.12};  // LAnkle
  rest[15] = {0.10, -0.035, 1.73}; // REye
  rest[16] = {0.10, 0.035, 1.73};  // LEye
  rest[17] = {0.04, -0.080, 1.71}; // REar
  rest[18] = {0.04, 0.080, 1.71};  // LEar
  rest[19] = {0.16, 0.150, 0.03};  // LBigToe
  rest[20] = {0.14, 0.200, 0.03};  // LSmallToe
  rest[21] = {-0.06, 0.140, 0.03}; // LHeel
  rest[22] = {0.16, -0.150, 0.03}; // RBigToe
  rest[23] = {0.14, -0.200, 0.03}; // RSmallToe
  rest[24] = {-0.06, -0.140, 0.03}; // RHeel
  return rest;
}

inline MotionSpec::MotionSpec() : rest(body25_rest_pose()) {}

namespace detail {
// Counter-stream tags; all synthetic randomness hangs off (seed, tag, indices).
inline constexpr std::uint64_t kStreamAmplitude = 1;
inline constexpr std::uint64_t kStreamCycles = 2;
inline constexpr std::uint64_t kStreamPhase = 3;
inline constexpr std::uint64_t kStreamNoise = 4;
inline constexpr std::uint64_t kStreamDropout = 5;
}  // namespace detail

/// Per-joint, per-axis sinusoid parameters, pure functions of the seed.
struct JointOscillator {
  Vec3d amplitude = Vec3d::Zero();  // world units
  Vec3d cycles = Vec3d::Zero();     // periods over the whole clip
  Vec3d phase = Vec3d::Zero();      // radians
};

inline std::array<JointOscillator, kNumJoints> motion_parameters(const MotionSpec& spec) {
  spec.validate();
  const CounterRng rng(spec.seed);
  std::array<JointOscillator, kNumJoints> params;
  for (std::uint64_t j = 0; j < kNumJoints; ++j) {
    JointOscillator& osc = params[j];
    for (std::uint64_t a = 0; a < 3; ++a) {
      osc.amplitude[static_cast<int>(a)] =
          spec.amplitude_scale * rng.uniform({detail::kStreamAmplitude, j, a}, 0.3, 1.0);
      osc.cycles[static_cast<int>(a)] =
          rng.uniform({detail::kStreamCycles, j, a}, spec.min_cycles, spec.max_cycles);
      osc.phase[static_cast<int>(a)] =
          rng.uniform({detail::kStreamPhase, j, a}, 0.0, 2.0 * std::numbers::pi);
    }
  }
  return params;
}

/// Frame-major ground-truth landmark positions:
///   p_j(t) = rest_j + amplitude .* sin(2 pi cycles t / frame_count + phase).
inline std::vector<std::array<Vec3d, kNumJoints>> generate_motion(const MotionSpec& spec) {
  spec.validate();
  const std::array<JointOscillator, kNumJoints> params = motion_parameters(spec);
  std::vector<std::array<Vec3d, kNumJoints>> frames(static_cast<std::size_t>(spec.frame_count));
  for (int t = 0; t < spec.frame_count; ++t) {
    for (int j = 0; j < kNumJoints; ++j) {
      const JointOscillator& osc = params[static_cast<std::size_t>(j)];
      const Vec3d arg = 2.0 * std::numbers::pi * osc.cycles * static_cast<double>(t) /
                            static_cast<double>(spec.frame_count) +
                        osc.phase;
      frames[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] =
          spec.rest[static_cast<std::size_t>(j)] + osc.amplitude.cwiseProduct(arg.array().sin().matrix());
    }
  }
  return frames;
}

/// Builds the rig's camera views; every returned view passes validate().
inline std::vector<CameraViewd> generate_rig(const RigSpec& spec) {
  spec.validate();
  std::vector<CameraViewd> views;
  views.reserve(static_cast<std::size_t>(spec.camera_count));
  const Vec3d up = Vec3d::UnitZ();
  for (int i = 0; i < spec.camera_count; ++i) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(i) /
                         static_cast<double>(spec.camera_count);
    const Vec3d center(spec.look_at.x() + spec.radius * std::cos(angle),
                       spec.look_at.y() + spec.radius * std::sin(angle),
                       spec.heights[static_cast<std::size_t>(i) % spec.heights.size()]);

    const Vec3d forward = (spec.look_at - center).normalized();
    const Vec3d side = forward.cross(up);
    if (side.norm() < 1e-9) {
      throw CalibrationError("rig: camera " + std::to_string(i) + " looks along the vertical axis");
    }
    CameraViewd view;
    view.rotation.row(0) = side.normalized().transpose();
    view.rotation.row(1) = forward.cross(side.normalized()).transpose();
    view.rotation.row(2) = forward.transpose();
    view.translation = -view.rotation * center;
    view.intrinsics << spec.focal, 0.0, 0.5 * spec.image_size.x(),
                       0.0, spec.focal, 0.5 * spec.image_size.y(),
                       0.0, 0.0, 1.0;
    view.image_size = spec.image_size;
    view.view_id = i;
    validate(view);
    views.push_back(view);
  }
  return views;
}

/// Projects every ground-truth landmark into every view, adds Gaussian pixel
/// noise, applies dropout, and assigns model confidences. Deterministic given
/// the spec seed regardless of evaluation order.
inline std::vector<Detection2Dd> observe(const std::vector<CameraViewd>& views,
                                         const std::vector<std::array<Vec3d, kNumJoints>>& motion,
                                         const ObservationSpec& spec) {
  spec.validate();
  const CounterRng rng(spec.seed);
  std::vector<Detection2Dd> detections;
  detections.reserve(motion.size() * views.size() * kNumJoints);
  for (std::size_t t = 0; t < motion.size(); ++t) {
    for (const CameraViewd& view : views) {
      for (int j = 0; j < kNumJoints; ++j) {
        const Vec3d& p = motion[t][static_cast<std::size_t>(j)];
        if (point_depth(view, p) <= 0.0) continue;  // defensive; rigs face the subject
        const std::uint64_t tc = static_cast<std::uint64_t>(t);
        const std::uint64_t vc = static_cast<std::uint64_t>(view.view_id);
        const std::uint64_t jc = static_cast<std::uint64_t>(j);
        if (spec.dropout_prob > 0.0 &&
            rng.uniform({detail::kStreamDropout, tc, vc, jc}) < spec.dropout_prob) {
          continue;
        }
        const auto [nx, ny] = rng.gaussian_pair({detail::kStreamNoise, tc, vc, jc});
        const Vec2d noise = spec.pixel_noise_sigma * Vec2d(nx, ny);

        Detection2Dd det;
        det.pixel = project(view, p) + noise;
        det.confidence = spec.confidence(noise.norm());
        det.joint_id = j;
        det.view_id = view.view_id;
        det.frame_id = static_cast<int>(t);
        detections.push_back(det);
      }
    }
  }
  return detections;
}

/// Repackages frame-major ground truth as per-joint trajectories (all valid).
inline std::vector<LandmarkTrajectoryd> to_trajectories(
    const std::vector<std::array<Vec3d, kNumJoints>>& motion, double frame_rate) {
  std::vector<LandmarkTrajectoryd> trajs(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    LandmarkTrajectoryd& traj = trajs[static_cast<std::size_t>(j)];
    traj.joint_id = j;
    traj.frame_rate = frame_rate;
    traj.positions.reserve(motion.size());
    for (const auto& frame : motion) traj.positions.push_back(frame[static_cast<std::size_t>(j)]);
    traj.valid.assign(motion.size(), 1);
  }
  return trajs;
}

/// Mean per-joint position error over (frame, joint) pairs that are valid on
/// both sides; synthesized estimates are excluded unless requested.
inline double mpjpe(const std::vector<LandmarkTrajectoryd>& estimated,
                    const std::vector<LandmarkTrajectoryd>& ground_truth,
                    bool include_synthesized = false) {
  if (estimated.size() != ground_truth.size()) {
    throw InputError("mpjpe: joint count mismatch");
  }
  double sum = 0.0;
  std::int64_t count = 0;
  for (std::size_t j = 0; j < estimated.size(); ++j) {
    const LandmarkTrajectoryd& est = estimated[j];
    const LandmarkTrajectoryd& gt = ground_truth[j];
    if (est.frame_count() != gt.frame_count()) {
      throw InputError("mpjpe: frame count mismatch for joint " + std::to_string(est.joint_id));
    }
    for (int t = 0; t < est.frame_count(); ++t) {
      const std::size_t ti = static_cast<std::size_t>(t);
      if (!est.valid.empty() && !est.valid[ti]) continue;
      if (!gt.valid.empty() && !gt.valid[ti]) continue;
      if (!include_synthesized && !est.synthesized.empty() && est.synthesized[ti]) continue;
      sum += (est.positions[ti] - gt.positions[ti]).norm();
      ++count;
    }
  }
  if (count == 0) throw EmptyTrajectoryError("mpjpe: no comparable (frame, joint) pairs");
  return sum / static_cast<double>(count);
}

/// Mean frame-to-frame displacement across joints — the temporal-stability
/// score smoothing is expected to reduce.
inline double mean_jitter(const std::vector<LandmarkTrajectoryd>& trajectories) {
  double sum = 0.0;
  std::int64_t count = 0;
  for (const LandmarkTrajectoryd& traj : trajectories) {
    for (int t = 1; t < traj.frame_count(); ++t) {
      const std::size_t ti = static_cast<std::size_t>(t);
      if (!traj.valid.empty() && (!traj.valid[ti] || !traj.valid[ti - 1])) continue;
      sum += (traj.positions[ti] - traj.positions[ti - 1]).norm();
      ++count;
    }
  }
  if (count == 0) throw EmptyTrajectoryError("mean_jitter: no consecutive valid frames");
  return sum / static_cast<double>(count);
}

}  // namespace mvlm
