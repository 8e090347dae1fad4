#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mvlm/camera.hpp"
#include "mvlm/spherical_harmonics.hpp"
#include "mvlm/types.hpp"

namespace mvlm {

inline constexpr int kTokenCount = 27;  // 1 rotation + 1 translation + 25 joints
inline constexpr int kTokenWidth = 192;

struct RotationEncodingConfig {
  int max_degree = 12;
  int roll_harmonics = 8;

  int live_width() const { return (max_degree + 1) * (max_degree + 1) + 2 * roll_harmonics; }

  void validate() const {
    if (max_degree < 0 || roll_harmonics < 0) {
      throw ConfigError("rotation encoding: max_degree and roll_harmonics must be non-negative");
    }
    if (live_width() > kTokenWidth) {
      throw ConfigError("rotation encoding: (d+1)^2 + 2*roll_harmonics exceeds token width " +
                        std::to_string(kTokenWidth));
    }
  }
};

struct FourierConfig {
  int depth = 32;

  int live_width() const { return 6 * depth; }

  void validate() const {
    if (depth < 1) {
      throw ConfigError("fourier encoding: depth must be >= 1");
    }
    if (live_width() > kTokenWidth) {
      throw ConfigError("fourier encoding: 6*depth exceeds token width " +
                        std::to_string(kTokenWidth));
    }
  }
};

/// Axis-aligned box used to map world coordinates into [-1, 1]^3 before
/// Fourier encoding. Stored verbatim in the token-file header so consumers
/// can undo the normalization. Default-constructed boxes are empty (min
/// +inf, max -inf) so that expand() alone builds a correct hull.
template <typename Scalar>
struct BoundingBox {
  Vec3<Scalar> min = Vec3<Scalar>::Constant(std::numeric_limits<Scalar>::infinity());
  Vec3<Scalar> max = Vec3<Scalar>::Constant(-std::numeric_limits<Scalar>::infinity());

  static BoundingBox empty() { return BoundingBox{}; }

  bool valid() const {
    return min.allFinite() && max.allFinite() && (max.array() >= min.array()).all();
  }

  void expand(const Vec3<Scalar>& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  void expand(const BoundingBox& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }

  /// Per-axis affine map onto [-1, 1]; an axis with zero extent maps to 0.
  Vec3<Scalar> normalize(const Vec3<Scalar>& p) const {
    if (!valid()) {
      throw InputError("bounding box is empty or non-finite; cannot normalize");
    }
    Vec3<Scalar> out;
    for (int a = 0; a < 3; ++a) {
      const Scalar extent = max[a] - min[a];
      out[a] = extent > Scalar(0) ? Scalar(2) * (p[a] - min[a]) / extent - Scalar(1) : Scalar(0);
    }
    return out;
  }
};

using BoundingBoxd = BoundingBox<double>;

namespace detail {

template <typename Scalar>
Scalar wrap_pi(Scalar angle) {
  // Wrap into (-pi, pi].
  constexpr Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
  angle = std::fmod(angle, two_pi);
  if (angle <= -Scalar(EIGEN_PI)) angle += two_pi;
  if (angle > Scalar(EIGEN_PI)) angle -= two_pi;
  return angle;
}

}  // namespace detail

/// Encodes a rotation as one width-192 token: the Euler triple (theta, phi,
/// psi) = (yaw, pitch, roll) is mapped to all real SH basis values at polar
/// angle theta / azimuth phi, concatenated with (sin n*psi, cos n*psi) pairs
/// for n = 1..roll_harmonics, zero-padded to the token width. Negative yaw is
/// canonicalized via (theta, phi) -> (-theta, phi + pi), which leaves the
/// viewing direction on the sphere unchanged and keeps theta in [0, pi].
template <typename Scalar>
VecX<Scalar> encode_rotation(const Mat3<Scalar>& R, const RotationEncodingConfig& config) {
  config.validate();
  if ((R * R.transpose() - Mat3<Scalar>::Identity()).norm() > Scalar(1e-6)) {
    throw InputError("encode_rotation: matrix is not orthonormal");
  }

  const EulerAngles<Scalar> euler = rotation_to_euler(R);
  Scalar theta = euler.yaw;
  Scalar phi = euler.pitch;
  const Scalar psi = euler.roll;
  if (theta < Scalar(0)) {
    theta = -theta;
    phi = detail::wrap_pi(phi + Scalar(EIGEN_PI));
  }

  VecX<Scalar> out = VecX<Scalar>::Zero(kTokenWidth);
  const int sh_width = (config.max_degree + 1) * (config.max_degree + 1);
  out.head(sh_width) = real_sh_block(config.max_degree, theta, phi);
  for (int n = 1; n <= config.roll_harmonics; ++n) {
    out[sh_width + 2 * (n - 1)] = std::sin(Scalar(n) * psi);
    out[sh_width + 2 * (n - 1) + 1] = std::cos(Scalar(n) * psi);
  }
  return out;
}

/// Encodes a 3-vector as one width-192 token of multi-frequency features
/// sin(2^f * pi * v_c), cos(2^f * pi * v_c) for f in [0, depth). Layout is
/// component-major, frequency-minor, sin before cos; unused tail entries are
/// zero. Components are expected pre-normalized into [-1, 1].
template <typename Scalar>
VecX<Scalar> encode_fourier(const Vec3<Scalar>& v, const FourierConfig& config) {
  config.validate();
  if (!v.allFinite()) {
    throw InputError("encode_fourier: non-finite input");
  }

  VecX<Scalar> out = VecX<Scalar>::Zero(kTokenWidth);
  for (int c = 0; c < 3; ++c) {
    Scalar arg = Scalar(EIGEN_PI) * v[c];
    for (int f = 0; f < config.depth; ++f) {
      const int base = c * 2 * config.depth + 2 * f;
      out[base] = std::sin(arg);
      out[base + 1] = std::cos(arg);
      arg *= Scalar(2);
    }
  }
  return out;
}

/// One frame/view conditioning block: row 0 rotation, row 1 translation,
/// rows 2..26 the BODY-25 joints. Encodings are computed in the working
/// scalar type and stored as float32, the interchange precision.
struct ConditioningTokenSet {
  Eigen::Matrix<float, kTokenCount, kTokenWidth, Eigen::RowMajor> tokens;
  std::int64_t frame_id = 0;
  int view_id = 0;
};

template <typename Scalar>
ConditioningTokenSet assemble_tokens(const CameraView<Scalar>& view,
                                     const std::vector<Vec3<Scalar>>& landmarks,
                                     const RotationEncodingConfig& rot_cfg,
                                     const FourierConfig& fourier_cfg,
                                     const BoundingBox<Scalar>& bounds) {
  if (static_cast<int>(landmarks.size()) != kNumJoints) {
    throw InputError("assemble_tokens: expected " + std::to_string(kNumJoints) +
                     " landmarks, got " + std::to_string(landmarks.size()));
  }

  ConditioningTokenSet set;
  set.view_id = view.view_id;
  set.tokens.row(0) = encode_rotation(view.rotation, rot_cfg).template cast<float>().transpose();
  set.tokens.row(1) =
      encode_fourier(bounds.normalize(view.translation), fourier_cfg).template cast<float>().transpose();
  for (int j = 0; j < kNumJoints; ++j) {
    set.tokens.row(2 + j) =
        encode_fourier(bounds.normalize(landmarks[static_cast<std::size_t>(j)]), fourier_cfg)
            .template cast<float>()
            .transpose();
  }
  return set;
}

}  // namespace mvlm
