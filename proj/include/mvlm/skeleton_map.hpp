#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvlm/body25.hpp"
#include "mvlm/camera.hpp"
#include "mvlm/image.hpp"
#include "mvlm/types.hpp"

namespace mvlm {

struct SkeletonMapConfig {
  int width = 384;
  int height = 512;
  int thickness = 3;  // stroke width in px

  void validate() const {
    if (width <= 0 || height <= 0) throw ConfigError("skeleton map: size must be positive");
    if (thickness < 1) throw ConfigError("skeleton map: thickness must be >= 1");
  }
};

namespace detail {

/// Paints every pixel whose center lies within radius of segment [a, b].
/// Pixel (x, y) is sampled at continuous coordinates (x, y).
template <typename Scalar>
void rasterize_segment(Image8& image, const Vec2<Scalar>& a, const Vec2<Scalar>& b, Scalar radius,
                       const body25::Rgb& color) {
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x(), b.x()) - radius)));
  const int x1 = std::min(image.width - 1, static_cast<int>(std::ceil(std::max(a.x(), b.x()) + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y(), b.y()) - radius)));
  const int y1 = std::min(image.height - 1, static_cast<int>(std::ceil(std::max(a.y(), b.y()) + radius)));

  const Vec2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  const Scalar r2 = radius * radius;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2<Scalar> p{Scalar(x), Scalar(y)};
      Scalar t = len2 > Scalar(0) ? (p - a).dot(ab) / len2 : Scalar(0);
      t = std::clamp(t, Scalar(0), Scalar(1));
      if ((p - (a + t * ab)).squaredNorm() <= r2) {
        std::uint8_t* px = image.at(x, y);
        px[0] = color.r;
        px[1] = color.g;
        px[2] = color.b;
      }
    }
  }
}

}  // namespace detail

/// Projects the 25 landmarks into the view and draws the BODY-25 limbs as
/// colored strokes on black. A limb is skipped when either endpoint is behind
/// the camera; strokes falling outside the frame are clipped. Rasterization
/// is purely arithmetic — identical inputs yield identical pixels.
template <typename Scalar>
Image8 render_skeleton_map(const CameraView<Scalar>& view, const std::vector<Vec3<Scalar>>& landmarks,
                           const SkeletonMapConfig& config = {}) {
  config.validate();
  if (static_cast<int>(landmarks.size()) != kNumJoints) {
    throw InputError("render_skeleton_map: expected " + std::to_string(kNumJoints) + " landmarks, got " +
                     std::to_string(landmarks.size()));
  }

  Image8 image(config.width, config.height);
  std::array<Vec2<Scalar>, kNumJoints> projected;
  std::array<bool, kNumJoints> in_front{};
  for (int j = 0; j < kNumJoints; ++j) {
    const Vec3<Scalar>& p = landmarks[static_cast<std::size_t>(j)];
    in_front[j] = p.allFinite() && point_depth(view, p) > Scalar(0);
    if (in_front[j]) projected[j] = project(view, p);
  }

  const Scalar radius = Scalar(config.thickness) / Scalar(2);
  for (const body25::Limb& limb : body25::kLimbs) {
    if (!in_front[limb.parent] || !in_front[limb.child]) continue;
    detail::rasterize_segment(image, projected[limb.parent], projected[limb.child], radius,
                              body25::limb_color(limb));
  }
  return image;
}

}  // namespace mvlm
