#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "mvlm/types.hpp"

namespace mvlm {

/// Per-joint time series of 3D positions. Invalid frames are holes left by
/// triangulation; fill_gaps turns them into synthesized positions.
template <typename Scalar>
struct LandmarkTrajectory {
  int joint_id = 0;
  std::vector<Vec3<Scalar>> positions;
  std::vector<std::uint8_t> valid;        // aligned with positions
  std::vector<std::uint8_t> synthesized;  // set by fill_gaps; empty means all false
  double frame_rate = 25.0;

  int frame_count() const { return static_cast<int>(positions.size()); }
};

using LandmarkTrajectoryd = LandmarkTrajectory<double>;

/// Savitzky-Golay smoothing filter: the center row of the least-squares
/// degree-P polynomial fit over a window of 2M+1 frames.
template <typename Scalar>
struct SGFilterSpec {
  int half_window = 5;  // M
  int degree = 3;       // P
  VecX<Scalar> coefficients;  // beta, length 2M+1

  int window_size() const { return 2 * half_window + 1; }
};

using SGFilterSpecd = SGFilterSpec<double>;

/// Closed-form Savitzky-Golay coefficients from the normal equations of the
/// windowed polynomial fit. Evaluated through discrete orthogonal (Gram)
/// polynomials on j = -M..M, which keeps the sum/moment identities accurate
/// for every admissible degree:
///   beta_j = sum_{n<=P} q_n(0) q_n(j) / |q_n|^2.
/// Odd-n terms vanish at the center, so beta is exactly symmetric.
template <typename Scalar = double>
SGFilterSpec<Scalar> sg_coefficients(int half_window, int degree) {
  if (half_window < 1) {
    throw ConfigError("sg_coefficients: half window must be >= 1");
  }
  if (degree < 0 || degree > 2 * half_window) {
    throw ConfigError("sg_coefficients: degree must satisfy 0 <= P <= 2M (got P=" +
                      std::to_string(degree) + ", M=" + std::to_string(half_window) + ")");
  }

  const int n_points = 2 * half_window + 1;
  const int center = half_window;

  VecX<Scalar> beta = VecX<Scalar>::Constant(n_points, Scalar(1) / Scalar(n_points));
  VecX<Scalar> q_prev = VecX<Scalar>::Ones(n_points);           // q_0
  VecX<Scalar> q_cur(n_points);                                 // q_1(j) = j
  for (int i = 0; i < n_points; ++i) q_cur(i) = Scalar(i - half_window);
  Scalar norm_prev = Scalar(n_points);

  for (int n = 1; n <= degree; ++n) {
    const Scalar norm_cur = q_cur.squaredNorm();
    if (n % 2 == 0) {
      beta += (q_cur(center) / norm_cur) * q_cur;
    }
    // Monic three-term recurrence; the symmetric grid has no diagonal term.
    VecX<Scalar> q_next(n_points);
    const Scalar ratio = norm_cur / norm_prev;
    for (int i = 0; i < n_points; ++i) {
      q_next(i) = Scalar(i - half_window) * q_cur(i) - ratio * q_prev(i);
    }
    q_prev.swap(q_cur);
    q_cur.swap(q_next);
    norm_prev = norm_cur;
  }

  SGFilterSpec<Scalar> spec;
  spec.half_window = half_window;
  spec.degree = degree;
  spec.coefficients = std::move(beta);
  return spec;
}

namespace detail {

/// Least-squares polynomial fit over frames [lo, hi] evaluated at the target
/// frame. The basis is centered at the target and scaled into [-1, 1], so the
/// fitted value is simply the constant coefficient.
template <typename Scalar>
Vec3<Scalar> fit_window_at(const std::vector<Vec3<Scalar>>& positions, int lo, int hi, int target,
                           int degree) {
  const int n_points = hi - lo + 1;
  const int fit_degree = std::min(degree, n_points - 1);
  Scalar scale = Scalar(1);
  for (int f = lo; f <= hi; ++f) scale = std::max(scale, Scalar(std::abs(f - target)));

  MatX<Scalar> basis(n_points, fit_degree + 1);
  MatX<Scalar> rhs(n_points, 3);
  for (int f = lo; f <= hi; ++f) {
    const Scalar x = Scalar(f - target) / scale;
    Scalar power = Scalar(1);
    for (int n = 0; n <= fit_degree; ++n) {
      basis(f - lo, n) = power;
      power *= x;
    }
    rhs.row(f - lo) = positions[static_cast<std::size_t>(f)].transpose();
  }
  const MatX<Scalar> coeffs = basis.colPivHouseholderQr().solve(rhs);
  return coeffs.row(0).transpose();
}

}  // namespace detail

/// Applies the filter per frame and per coordinate. Interior frames (full
/// window available) use the precomputed coefficients; frames within M of
/// either end are fitted on their asymmetric window and evaluated in place,
/// which preserves polynomial reproduction at the boundaries.
/// The trajectory must be gap-free; run fill_gaps first.
template <typename Scalar>
LandmarkTrajectory<Scalar> smooth_trajectory(const LandmarkTrajectory<Scalar>& traj,
                                             const SGFilterSpec<Scalar>& spec) {
  const int n_frames = traj.frame_count();
  if (n_frames < 1) {
    throw EmptyTrajectoryError("smooth_trajectory: trajectory has no frames");
  }
  if (static_cast<int>(traj.valid.size()) != n_frames) {
    throw InputError("smooth_trajectory: validity flags do not match frame count");
  }
  for (int f = 0; f < n_frames; ++f) {
    if (!traj.valid[static_cast<std::size_t>(f)]) {
      throw InputError("smooth_trajectory: frame " + std::to_string(f) +
                       " is invalid; run fill_gaps first");
    }
  }
  if (static_cast<int>(spec.coefficients.size()) != spec.window_size()) {
    throw ConfigError("smooth_trajectory: coefficient vector does not match the window size");
  }

  const int m = spec.half_window;
  LandmarkTrajectory<Scalar> out = traj;
  for (int f = 0; f < n_frames; ++f) {
    if (f - m >= 0 && f + m < n_frames) {
      Vec3<Scalar> sum = Vec3<Scalar>::Zero();
      for (int j = -m; j <= m; ++j) {
        sum += spec.coefficients(j + m) * traj.positions[static_cast<std::size_t>(f + j)];
      }
      out.positions[static_cast<std::size_t>(f)] = sum;
    } else {
      const int lo = std::max(0, f - m);
      const int hi = std::min(n_frames - 1, f + m);
      out.positions[static_cast<std::size_t>(f)] =
          detail::fit_window_at(traj.positions, lo, hi, f, spec.degree);
    }
  }
  return out;
}

/// Fills invalid frames: interior gaps by linear interpolation between the
/// nearest valid neighbors, leading/trailing gaps by replicating the nearest
/// valid value. Filled frames are flagged as synthesized.
template <typename Scalar>
LandmarkTrajectory<Scalar> fill_gaps(const LandmarkTrajectory<Scalar>& traj) {
  const int n_frames = traj.frame_count();
  if (static_cast<int>(traj.valid.size()) != n_frames) {
    throw InputError("fill_gaps: validity flags do not match frame count");
  }

  int first_valid = -1;
  int last_valid = -1;
  for (int f = 0; f < n_frames; ++f) {
    if (traj.valid[static_cast<std::size_t>(f)]) {
      if (first_valid < 0) first_valid = f;
      last_valid = f;
    }
  }
  if (first_valid < 0) {
    throw EmptyTrajectoryError("fill_gaps: trajectory for joint " +
                               std::to_string(traj.joint_id) + " has no valid frame");
  }

  LandmarkTrajectory<Scalar> out = traj;
  out.synthesized.assign(static_cast<std::size_t>(n_frames), 0);

  for (int f = 0; f < first_valid; ++f) {
    out.positions[static_cast<std::size_t>(f)] = traj.positions[static_cast<std::size_t>(first_valid)];
    out.synthesized[static_cast<std::size_t>(f)] = 1;
  }
  for (int f = last_valid + 1; f < n_frames; ++f) {
    out.positions[static_cast<std::size_t>(f)] = traj.positions[static_cast<std::size_t>(last_valid)];
    out.synthesized[static_cast<std::size_t>(f)] = 1;
  }

  int prev_valid = first_valid;
  for (int f = first_valid + 1; f <= last_valid; ++f) {
    if (traj.valid[static_cast<std::size_t>(f)]) {
      if (f - prev_valid > 1) {
        const Vec3<Scalar>& a = traj.positions[static_cast<std::size_t>(prev_valid)];
        const Vec3<Scalar>& b = traj.positions[static_cast<std::size_t>(f)];
        for (int g = prev_valid + 1; g < f; ++g) {
          const Scalar t = Scalar(g - prev_valid) / Scalar(f - prev_valid);
          out.positions[static_cast<std::size_t>(g)] = (Scalar(1) - t) * a + t * b;
          out.synthesized[static_cast<std::size_t>(g)] = 1;
        }
      }
      prev_valid = f;
    }
  }

  std::fill(out.valid.begin(), out.valid.end(), std::uint8_t(1));
  return out;
}

}  // namespace mvlm
