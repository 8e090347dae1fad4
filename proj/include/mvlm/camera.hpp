#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>

#include "mvlm/types.hpp"

namespace mvlm {

namespace detail {

template <typename Scalar>
constexpr Scalar orthonormality_tolerance() {
  // 1e-9 is the contract for double; widen for lower-precision scalars.
  constexpr Scalar eps100 = std::numeric_limits<Scalar>::epsilon() * Scalar(100);
  return eps100 > Scalar(1e-9) ? eps100 : Scalar(1e-9);
}

}  // namespace detail

/// Throws CalibrationError if any CameraView invariant is violated.
template <typename Scalar>
void validate(const CameraView<Scalar>& view) {
  const Scalar tol = detail::orthonormality_tolerance<Scalar>();
  const std::string who = "view " + std::to_string(view.view_id) + ": ";

  if (!view.intrinsics.allFinite() || !view.rotation.allFinite() || !view.translation.allFinite()) {
    throw CalibrationError(who + "non-finite camera parameters");
  }

  const Mat3<Scalar> gram = view.rotation.transpose() * view.rotation - Mat3<Scalar>::Identity();
  if (gram.cwiseAbs().maxCoeff() >= tol) {
    throw CalibrationError(who + "rotation is not orthonormal");
  }
  if (std::abs(view.rotation.determinant() - Scalar(1)) >= tol) {
    throw CalibrationError(who + "rotation determinant is not +1 (reflection?)");
  }

  const Mat3<Scalar>& K = view.intrinsics;
  if (std::abs(K(1, 0)) >= tol || std::abs(K(2, 0)) >= tol || std::abs(K(2, 1)) >= tol) {
    throw CalibrationError(who + "intrinsics are not upper triangular");
  }
  if (!(K(0, 0) > Scalar(0)) || !(K(1, 1) > Scalar(0))) {
    throw CalibrationError(who + "focal lengths must be strictly positive");
  }
  if (std::abs(K(2, 2) - Scalar(1)) >= tol) {
    throw CalibrationError(who + "intrinsics bottom-right entry must be 1");
  }

  if (view.image_size.x() <= 0 || view.image_size.y() <= 0) {
    throw CalibrationError(who + "image size must be positive");
  }
}

/// Camera center in world coordinates: -R^T t.
template <typename Scalar>
Vec3<Scalar> camera_center(const CameraView<Scalar>& view) {
  return -(view.rotation.transpose() * view.translation);
}

/// Back-projects a pixel to the world-space ray through it.
/// direction = normalize(R^T K^{-1} [pixel, 1]^T), origin = camera center.
template <typename Scalar>
Ray<Scalar> back_project(const CameraView<Scalar>& view, const Vec2<Scalar>& pixel) {
  const Mat3<Scalar>& K = view.intrinsics;
  if (!(K(0, 0) > Scalar(0)) || !(K(1, 1) > Scalar(0)) || !std::isfinite(K(0, 0))) {
    throw CalibrationError("back_project: singular intrinsics");
  }
  const Vec3<Scalar> homogeneous(pixel.x(), pixel.y(), Scalar(1));
  // K is upper triangular with unit bottom row, so K^{-1} is a triangular solve.
  const Vec3<Scalar> cam_dir = K.template triangularView<Eigen::Upper>().solve(homogeneous);
  const Vec3<Scalar> world_dir = view.rotation.transpose() * cam_dir;
  Ray<Scalar> ray;
  ray.origin = camera_center(view);
  ray.direction = world_dir.normalized();
  return ray;
}

/// Pinhole projection of a world point: dehomogenized K (R p + t).
/// Throws BehindCameraError for non-positive depth.
template <typename Scalar>
Vec2<Scalar> project(const CameraView<Scalar>& view, const Vec3<Scalar>& point) {
  const Vec3<Scalar> cam = view.rotation * point + view.translation;
  if (!(cam.z() > Scalar(0))) {
    throw BehindCameraError("project: point has non-positive depth in view " +
                            std::to_string(view.view_id));
  }
  const Vec3<Scalar> h = view.intrinsics * cam;
  return h.template head<2>() / h.z();
}

/// Depth of a world point in the camera frame; negative means behind the camera.
template <typename Scalar>
Scalar point_depth(const CameraView<Scalar>& view, const Vec3<Scalar>& point) {
  return view.rotation.row(2).dot(point) + view.translation.z();
}

// ---------------------------------------------------------------- Euler angles

/// Z-Y-X intrinsic (yaw-pitch-roll) factorization: R = Rz(yaw) Ry(pitch) Rx(roll).
template <typename Scalar>
struct EulerAngles {
  Scalar yaw = Scalar(0);    // about Z, first axis of the decomposition
  Scalar pitch = Scalar(0);  // about Y
  Scalar roll = Scalar(0);   // about X
  bool gimbal_lock = false;
};

template <typename Scalar>
Mat3<Scalar> euler_to_rotation(Scalar yaw, Scalar pitch, Scalar roll) {
  using std::cos;
  using std::sin;
  Mat3<Scalar> rz, ry, rx;
  rz << cos(yaw), -sin(yaw), 0, sin(yaw), cos(yaw), 0, 0, 0, 1;
  ry << cos(pitch), 0, sin(pitch), 0, 1, 0, -sin(pitch), 0, cos(pitch);
  rx << 1, 0, 0, 0, cos(roll), -sin(roll), 0, sin(roll), cos(roll);
  return rz * ry * rx;
}

template <typename Scalar>
Mat3<Scalar> euler_to_rotation(const EulerAngles<Scalar>& a) {
  return euler_to_rotation(a.yaw, a.pitch, a.roll);
}

/// Z-Y-X intrinsic decomposition of an orthonormal rotation.
/// At gimbal lock (|pitch| within ~1e-7 of pi/2) yaw and roll are coupled;
/// the tie-break sets roll = 0 and folds the remaining rotation into yaw.
template <typename Scalar>
EulerAngles<Scalar> rotation_to_euler(const Mat3<Scalar>& R) {
  EulerAngles<Scalar> a;
  const Scalar cos_pitch = std::hypot(R(2, 1), R(2, 2));
  a.pitch = std::atan2(-R(2, 0), cos_pitch);
  if (cos_pitch < Scalar(1e-7)) {
    a.gimbal_lock = true;
    a.roll = Scalar(0);
    if (R(2, 0) < Scalar(0)) {
      // pitch = +pi/2: R(0,1) = sin(roll - yaw), R(0,2) = cos(roll - yaw)
      a.yaw = std::atan2(-R(0, 1), R(0, 2));
    } else {
      // pitch = -pi/2: R(0,1) = -sin(roll + yaw), R(0,2) = -cos(roll + yaw)
      a.yaw = std::atan2(-R(0, 1), -R(0, 2));
    }
  } else {
    a.yaw = std::atan2(R(1, 0), R(0, 0));
    a.roll = std::atan2(R(2, 1), R(2, 2));
  }
  return a;
}

}  // namespace mvlm
