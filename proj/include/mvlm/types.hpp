#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mvlm {

template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using VecXd = VecX<double>;
using MatXd = MatX<double>;

/// Number of landmarks in the BODY-25 layout.
inline constexpr int kNumJoints = 25;

// ---------------------------------------------------------------- errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input bytes (JSON syntax, bad magic, truncated file, ...).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::int64_t byte_offset = -1)
      : Error(what), byte_offset(byte_offset) {}
  std::int64_t byte_offset;  // -1 when unknown
};

/// Camera parameters violate the CameraView invariants.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or invalid caller-supplied values.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Encoding or filter configuration violates a width/rank bound.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientViewsError : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Point has non-positive depth in the camera frame.
class BehindCameraError : public Error {
 public:
  using Error::Error;
};

/// Trajectory has no valid frame at all.
class EmptyTrajectoryError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------- domain types

/// Pinhole camera. Extrinsics convention: x_cam = R * x_world + t,
/// so the camera center in world coordinates is -R^T t.
/// Pixel origin is the top-left image corner, +x right, +y down.
template <typename Scalar>
struct CameraView {
  Mat3<Scalar> intrinsics = Mat3<Scalar>::Identity();  // upper triangular, focals > 0
  Mat3<Scalar> rotation = Mat3<Scalar>::Identity();    // world -> camera
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();
  Eigen::Vector2i image_size = Eigen::Vector2i::Zero();  // (width, height) in px
  int view_id = -1;
};

using CameraViewd = CameraView<double>;

/// One detected 2D keypoint with its detector confidence.
template <typename Scalar>
struct Detection2D {
  Vec2<Scalar> pixel = Vec2<Scalar>::Zero();
  Scalar confidence = Scalar(0);  // in [0, 1]
  int joint_id = -1;              // BODY-25 index, [0, 25)
  int view_id = -1;
  int frame_id = -1;
};

using Detection2Dd = Detection2D<double>;

/// World-space ray: origin + lambda * direction, lambda >= 0, |direction| = 1.
template <typename Scalar>
struct Ray {
  Vec3<Scalar> origin = Vec3<Scalar>::Zero();
  Vec3<Scalar> direction = Vec3<Scalar>::UnitZ();
};

using Rayd = Ray<double>;

}  // namespace mvlm
