#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <unordered_map>
#include <vector>

#include "mvlm/camera.hpp"
#include "mvlm/types.hpp"

namespace mvlm {

/// The uncertainty-weighted ray-intersection problem for one landmark in one
/// frame: minimize  sum_v (w_v * |P(d_v)(l - o_v)|)^2  over candidate points l.
template <typename Scalar>
struct TriangulationProblem {
  std::vector<Ray<Scalar>> rays;
  std::vector<Scalar> weights;  // aligned with rays, in [0, 1]
};

template <typename Scalar>
struct TriangulationResult {
  Vec3<Scalar> point = Vec3<Scalar>::Zero();
  Scalar objective_value = Scalar(0);
  int iterations = 0;
  bool converged = false;
  bool condition_warning = false;  // near-degenerate ray geometry
};

/// Damped Levenberg-Marquardt schedule. The weight threshold excludes
/// low-confidence rays before solving.
struct LMConfig {
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  int max_iterations = 100;
  double step_tolerance = 1e-8;    // on |delta l|
  double weight_threshold = 0.1;   // tau
};

/// Relative eigenvalue bounds classifying the 3x3 normal matrix.
inline constexpr double kDegenerateEigenRatio = 1e-9;
inline constexpr double kConditionWarningEigenRatio = 1e-6;

/// P(d) = I - d d^T: projects onto the plane orthogonal to unit direction d.
template <typename Derived>
Mat3<typename Derived::Scalar> orthogonal_projector(const Eigen::MatrixBase<Derived>& direction) {
  using Scalar = typename Derived::Scalar;
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  const Scalar eps100 = std::numeric_limits<Scalar>::epsilon() * Scalar(100);
  const Scalar tol = eps100 > Scalar(1e-12) ? eps100 : Scalar(1e-12);
  const Vec3<Scalar> d = direction;
  if (std::abs(d.norm() - Scalar(1)) > tol) {
    throw InputError("orthogonal_projector: direction is not unit length");
  }
  return Mat3<Scalar>::Identity() - d * d.transpose();
}

/// Weighted squared perpendicular distance sum, with the confidence
/// multiplying the distance before squaring.
template <typename Scalar>
Scalar triangulation_objective(const Vec3<Scalar>& point, const TriangulationProblem<Scalar>& problem) {
  if (problem.rays.size() != problem.weights.size()) {
    throw InputError("triangulation_objective: rays and weights differ in length");
  }
  Scalar total = Scalar(0);
  for (std::size_t v = 0; v < problem.rays.size(); ++v) {
    const Ray<Scalar>& ray = problem.rays[v];
    const Vec3<Scalar> offset = point - ray.origin;
    const Vec3<Scalar> perpendicular = offset - ray.direction * ray.direction.dot(offset);
    const Scalar weighted_distance = problem.weights[v] * perpendicular.norm();
    total += weighted_distance * weighted_distance;
  }
  return total;
}

namespace detail {

/// Normal system of the quadratic objective: A l = b with
/// A = sum w^2 P(d), b = sum w^2 P(d) o.
template <typename Scalar>
struct NormalSystem {
  Mat3<Scalar> A = Mat3<Scalar>::Zero();
  Vec3<Scalar> b = Vec3<Scalar>::Zero();
  Vec3<Scalar> eigenvalues = Vec3<Scalar>::Zero();  // ascending
  Mat3<Scalar> eigenvectors = Mat3<Scalar>::Identity();

  bool degenerate() const {
    return !(eigenvalues(0) > kDegenerateEigenRatio * eigenvalues(2));
  }
  bool near_degenerate() const {
    return !(eigenvalues(0) > kConditionWarningEigenRatio * eigenvalues(2));
  }
};

template <typename Scalar>
NormalSystem<Scalar> assemble_normal_system(const TriangulationProblem<Scalar>& problem) {
  NormalSystem<Scalar> sys;
  for (std::size_t v = 0; v < problem.rays.size(); ++v) {
    const Scalar w2 = problem.weights[v] * problem.weights[v];
    if (w2 == Scalar(0)) continue;
    const Mat3<Scalar> proj = orthogonal_projector(problem.rays[v].direction);
    sys.A.noalias() += w2 * proj;
    sys.b.noalias() += w2 * (proj * problem.rays[v].origin);
  }
  Eigen::SelfAdjointEigenSolver<Mat3<Scalar>> eig(sys.A);
  sys.eigenvalues = eig.eigenvalues();
  sys.eigenvectors = eig.eigenvectors();
  return sys;
}

}  // namespace detail

/// Exact minimizer of the weighted least-squares objective. The objective is
/// quadratic in the point, so the solution is the 3x3 linear system
/// (sum w^2 P) l = sum w^2 P o, solved through an eigendecomposition that also
/// supplies the degeneracy test.
template <typename Scalar>
Vec3<Scalar> triangulate_closed_form(const TriangulationProblem<Scalar>& problem) {
  if (problem.rays.size() != problem.weights.size()) {
    throw InputError("triangulate_closed_form: rays and weights differ in length");
  }
  const auto sys = detail::assemble_normal_system(problem);
  if (!(sys.eigenvalues(2) > Scalar(0)) || sys.degenerate()) {
    throw DegenerateGeometryError("triangulate_closed_form: normal matrix is rank deficient");
  }
  const Vec3<Scalar> projected = sys.eigenvectors.transpose() * sys.b;
  return sys.eigenvectors * (projected.array() / sys.eigenvalues.array()).matrix();
}

/// Damped Levenberg-Marquardt minimization, initialized at the centroid of the
/// surviving ray origins. Rays with weight below the threshold are discarded
/// first. Damping is increased on rejected steps and decreased on accepted
/// ones; accepted steps never raise the objective.
template <typename Scalar>
TriangulationResult<Scalar> triangulate_lm(const TriangulationProblem<Scalar>& problem,
                                           const LMConfig& config = {}) {
  if (problem.rays.size() != problem.weights.size()) {
    throw InputError("triangulate_lm: rays and weights differ in length");
  }
  TriangulationProblem<Scalar> usable;
  for (std::size_t v = 0; v < problem.rays.size(); ++v) {
    if (problem.weights[v] >= Scalar(config.weight_threshold)) {
      usable.rays.push_back(problem.rays[v]);
      usable.weights.push_back(problem.weights[v]);
    }
  }
  if (usable.rays.size() < 2) {
    throw InsufficientViewsError("triangulate_lm: fewer than 2 rays above the weight threshold");
  }

  const auto sys = detail::assemble_normal_system(usable);
  if (!(sys.eigenvalues(2) > Scalar(0)) || sys.degenerate()) {
    throw DegenerateGeometryError("triangulate_lm: all usable rays are (near) parallel");
  }

  TriangulationResult<Scalar> result;
  result.condition_warning = sys.near_degenerate();

  Vec3<Scalar> point = Vec3<Scalar>::Zero();
  for (const Ray<Scalar>& ray : usable.rays) point += ray.origin;
  point /= Scalar(usable.rays.size());

  Scalar objective = triangulation_objective(point, usable);
  Scalar damping = Scalar(config.initial_damping);
  constexpr Scalar kDampingFloor = Scalar(1e-15);
  constexpr Scalar kDampingCeil = Scalar(1e15);

  for (int iteration = 1; iteration <= config.max_iterations; ++iteration) {
    result.iterations = iteration;
    const Mat3<Scalar> damped = sys.A + damping * Mat3<Scalar>::Identity();
    const Vec3<Scalar> step = damped.ldlt().solve(sys.b - sys.A * point);

    if (step.norm() < Scalar(config.step_tolerance)) {
      const Vec3<Scalar> candidate = point + step;
      const Scalar candidate_objective = triangulation_objective(candidate, usable);
      if (candidate_objective < objective) {
        point = candidate;
        objective = candidate_objective;
      }
      result.converged = true;
      break;
    }

    const Vec3<Scalar> candidate = point + step;
    const Scalar candidate_objective = triangulation_objective(candidate, usable);
    if (candidate_objective < objective) {
      point = candidate;
      objective = candidate_objective;
      damping = std::max(damping * Scalar(config.damping_down), kDampingFloor);
    } else {
      damping = std::min(damping * Scalar(config.damping_up), kDampingCeil);
    }
  }

  result.point = point;
  result.objective_value = objective;
  return result;
}

// ---------------------------------------------------------------- per-frame entry

enum class FrameStatus {
  ok,
  insufficient_views,   // fewer than 2 usable rays; caller fills the gap later
  degenerate_geometry,  // usable rays nearly parallel
};

template <typename Scalar>
struct FrameTriangulation {
  FrameStatus status = FrameStatus::insufficient_views;
  TriangulationResult<Scalar> result;  // meaningful only when status == ok

  bool valid() const { return status == FrameStatus::ok; }
};

/// Triangulates one joint in one frame from its per-view detections.
/// Detections are back-projected through their views; confidences become
/// weights. Returns a non-ok status instead of throwing when the frame cannot
/// be triangulated, so temporal gap-filling can proceed downstream.
template <typename Scalar>
FrameTriangulation<Scalar> triangulate_frame(const std::vector<Detection2D<Scalar>>& detections,
                                             const std::vector<CameraView<Scalar>>& views,
                                             const LMConfig& config = {}) {
  std::unordered_map<int, const CameraView<Scalar>*> by_id;
  by_id.reserve(views.size());
  for (const CameraView<Scalar>& view : views) by_id.emplace(view.view_id, &view);

  TriangulationProblem<Scalar> problem;
  problem.rays.reserve(detections.size());
  problem.weights.reserve(detections.size());
  for (const Detection2D<Scalar>& det : detections) {
    const auto it = by_id.find(det.view_id);
    if (it == by_id.end()) {
      throw InputError("triangulate_frame: detection references unknown view " +
                       std::to_string(det.view_id));
    }
    problem.rays.push_back(back_project(*it->second, det.pixel));
    problem.weights.push_back(det.confidence);
  }

  FrameTriangulation<Scalar> frame;
  try {
    frame.result = triangulate_lm(problem, config);
    frame.status = FrameStatus::ok;
  } catch (const InsufficientViewsError&) {
    frame.status = FrameStatus::insufficient_views;
  } catch (const DegenerateGeometryError&) {
    frame.status = FrameStatus::degenerate_geometry;
  }
  return frame;
}

}  // namespace mvlm
