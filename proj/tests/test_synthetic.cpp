#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "mvlm/synthetic.hpp"
#include "test_support.hpp"

using namespace mvlm;

TEST_SUITE("synthetic") {
  TEST_CASE("four-camera rig sits on the prescribed circle") {
    RigSpec spec;
    spec.camera_count = 4;
    spec.radius = 3.0;
    spec.heights = {1.4};
    spec.look_at = Vec3d(0.0, 0.0, 1.0);
    const auto views = generate_rig(spec);
    REQUIRE(views.size() == 4);

    const Vec3d expected[4] = {{3.0, 0.0, 1.4}, {0.0, 3.0, 1.4}, {-3.0, 0.0, 1.4}, {0.0, -3.0, 1.4}};
    for (int i = 0; i < 4; ++i) {
      CHECK_NOTHROW(validate(views[static_cast<std::size_t>(i)]));
      CHECK(views[static_cast<std::size_t>(i)].view_id == i);
      CHECK((camera_center(views[static_cast<std::size_t>(i)]) - expected[i]).norm() < 1e-12);
      // Forward axis (third rotation row) points at the look-at target.
      const Vec3d forward = views[static_cast<std::size_t>(i)].rotation.row(2).transpose();
      const Vec3d to_target = (spec.look_at - expected[i]).normalized();
      CHECK((forward - to_target).norm() < 1e-12);
      // Right-handed world-to-camera map.
      CHECK(views[static_cast<std::size_t>(i)].rotation.determinant() ==
            doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("heights cycle across cameras") {
    RigSpec spec;
    spec.camera_count = 5;
    spec.heights = {1.0, 2.0};
    const auto views = generate_rig(spec);
    for (int i = 0; i < 5; ++i) {
      CHECK(camera_center(views[static_cast<std::size_t>(i)]).z() ==
            doctest::Approx(spec.heights[static_cast<std::size_t>(i) % 2]).epsilon(1e-12));
    }
  }

  TEST_CASE("a camera directly above the look-at point is rejected") {
    // Vanishing radius puts every center on the vertical axis through the
    // target: the look-at frame is undefined.
    RigSpec spec;
    spec.camera_count = 2;
    spec.radius = 1e-12;
    CHECK_THROWS_AS(generate_rig(spec), CalibrationError);

    RigSpec zero_radius;
    zero_radius.camera_count = 2;
    zero_radius.radius = 0.0;
    CHECK_THROWS_AS(generate_rig(zero_radius), ConfigError);
  }

  TEST_CASE("all landmarks project inside every default-rig view") {
    const auto views = generate_rig(RigSpec{});
    MotionSpec motion_spec;
    motion_spec.seed = 3;
    const auto motion = generate_motion(motion_spec);
    for (const auto& frame : motion) {
      for (const CameraViewd& view : views) {
        for (const Vec3d& p : frame) {
          CHECK(point_depth(view, p) > 0.0);
          const Vec2d px = project(view, p);
          CHECK(px.x() >= 0.0);
          CHECK(px.y() >= 0.0);
          CHECK(px.x() < view.image_size.x());
          CHECK(px.y() < view.image_size.y());
        }
      }
    }
  }

  TEST_CASE("zero amplitude freezes the skeleton at the rest pose") {
    MotionSpec spec;
    spec.amplitude_scale = 0.0;
    spec.frame_count = 10;
    spec.seed = 9;
    const auto motion = generate_motion(spec);
    for (const auto& frame : motion) {
      for (int j = 0; j < kNumJoints; ++j) {
        CHECK((frame[static_cast<std::size_t>(j)] - spec.rest[static_cast<std::size_t>(j)]).norm() <
              1e-15);
      }
    }
  }

  TEST_CASE("motion follows the documented sinusoid exactly") {
    MotionSpec spec;
    spec.seed = 17;
    spec.frame_count = 30;
    const auto params = motion_parameters(spec);
    const auto motion = generate_motion(spec);
    for (int t = 0; t < spec.frame_count; ++t) {
      for (int j = 0; j < kNumJoints; ++j) {
        const JointOscillator& osc = params[static_cast<std::size_t>(j)];
        Vec3d expected;
        for (int axis = 0; axis < 3; ++axis) {
          const double arg = 2.0 * std::numbers::pi * osc.cycles[axis] * t / spec.frame_count +
                             osc.phase[axis];
          expected[axis] = spec.rest[static_cast<std::size_t>(j)][axis] +
                           osc.amplitude[axis] * std::sin(arg);
        }
        CHECK((motion[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] - expected).norm() <
              1e-14);
      }
    }
  }

  TEST_CASE("oscillator parameters respect their documented ranges") {
    MotionSpec spec;
    spec.seed = 23;
    spec.amplitude_scale = 0.2;
    spec.min_cycles = 0.5;
    spec.max_cycles = 3.0;
    const auto params = motion_parameters(spec);
    for (const JointOscillator& osc : params) {
      for (int axis = 0; axis < 3; ++axis) {
        CHECK(osc.amplitude[axis] >= 0.3 * spec.amplitude_scale);
        CHECK(osc.amplitude[axis] <= 1.0 * spec.amplitude_scale);
        CHECK(osc.cycles[axis] >= spec.min_cycles);
        CHECK(osc.cycles[axis] <= spec.max_cycles);
        CHECK(osc.phase[axis] >= 0.0);
        CHECK(osc.phase[axis] < 2.0 * std::numbers::pi);
      }
    }
  }

  TEST_CASE("frame-to-frame displacement obeys the derivative bound") {
    MotionSpec spec;
    spec.seed = 29;
    spec.frame_count = 50;
    const auto params = motion_parameters(spec);
    const auto motion = generate_motion(spec);
    for (int t = 1; t < spec.frame_count; ++t) {
      for (int j = 0; j < kNumJoints; ++j) {
        const Vec3d step = motion[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)] -
                           motion[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(j)];
        const JointOscillator& osc = params[static_cast<std::size_t>(j)];
        for (int axis = 0; axis < 3; ++axis) {
          const double bound =
              osc.amplitude[axis] * 2.0 * std::numbers::pi * osc.cycles[axis] / spec.frame_count;
          CHECK(std::abs(step[axis]) <= bound + 1e-12);
        }
      }
    }
  }

  TEST_CASE("same seed reproduces, different seeds differ") {
    MotionSpec spec;
    spec.seed = 31;
    const auto a = generate_motion(spec);
    const auto b = generate_motion(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
      for (int j = 0; j < kNumJoints; ++j) {
        CHECK(a[t][static_cast<std::size_t>(j)] == b[t][static_cast<std::size_t>(j)]);
      }
    }
    spec.seed = 32;
    const auto c = generate_motion(spec);
    CHECK(a[0][0] != c[0][0]);
  }

  TEST_CASE("noise-free observation reproduces exact projections at confidence 1") {
    const auto views = generate_rig(RigSpec{});
    MotionSpec motion_spec;
    motion_spec.frame_count = 3;
    motion_spec.seed = 37;
    const auto motion = generate_motion(motion_spec);

    ObservationSpec obs;
    obs.pixel_noise_sigma = 0.0;
    obs.dropout_prob = 0.0;
    const auto detections = observe(views, motion, obs);
    REQUIRE(detections.size() == motion.size() * views.size() * kNumJoints);

    for (const Detection2Dd& det : detections) {
      const Vec3d& p = motion[static_cast<std::size_t>(det.frame_id)]
                             [static_cast<std::size_t>(det.joint_id)];
      const Vec2d expected = project(views[static_cast<std::size_t>(det.view_id)], p);
      CHECK((det.pixel - expected).norm() < 1e-12);
      CHECK(det.confidence == 1.0);
    }
  }

  TEST_CASE("pixel noise matches its nominal RMS within 5 percent") {
    const auto views = generate_rig(RigSpec{});
    MotionSpec motion_spec;
    motion_spec.frame_count = 125;  // 125 * 16 * 25 detections = 1e5 scalar samples
    motion_spec.seed = 41;
    const auto motion = generate_motion(motion_spec);

    ObservationSpec obs;
    obs.pixel_noise_sigma = 2.0;
    obs.seed = 5;
    const auto noisy = observe(views, motion, obs);
    ObservationSpec clean;
    const auto exact = observe(views, motion, clean);
    REQUIRE(noisy.size() == exact.size());

    double sum_sq = 0.0;
    std::int64_t samples = 0;
    for (std::size_t i = 0; i < noisy.size(); ++i) {
      const Vec2d delta = noisy[i].pixel - exact[i].pixel;
      sum_sq += delta.x() * delta.x() + delta.y() * delta.y();
      samples += 2;
      // Confidence follows the documented model of the realized error.
      CHECK(noisy[i].confidence == doctest::Approx(obs.confidence(delta.norm())).epsilon(1e-12));
    }
    const double rms = std::sqrt(sum_sq / static_cast<double>(samples));
    CHECK(samples >= 100000);
    CHECK(rms == doctest::Approx(2.0).epsilon(0.05));
  }

  TEST_CASE("dropout removes everything at probability one and nothing at zero") {
    const auto views = generate_rig(RigSpec{});
    MotionSpec motion_spec;
    motion_spec.frame_count = 2;
    const auto motion = generate_motion(motion_spec);

    ObservationSpec all_gone;
    all_gone.dropout_prob = 1.0;
    CHECK(observe(views, motion, all_gone).empty());

    ObservationSpec keep_all;
    keep_all.dropout_prob = 0.0;
    CHECK(observe(views, motion, keep_all).size() == motion.size() * views.size() * kNumJoints);
  }

  TEST_CASE("intermediate dropout rate lands near its expectation") {
    const auto views = generate_rig(RigSpec{});
    MotionSpec motion_spec;
    motion_spec.frame_count = 25;
    const auto motion = generate_motion(motion_spec);
    ObservationSpec obs;
    obs.dropout_prob = 0.3;
    obs.seed = 77;
    const double total = static_cast<double>(motion.size() * views.size() * kNumJoints);
    const double kept = static_cast<double>(observe(views, motion, obs).size());
    CHECK(kept / total == doctest::Approx(0.7).epsilon(0.03));
  }

  TEST_CASE("observation streams are independent of dropout toggling") {
    // The noise draw for a kept detection must not depend on whether other
    // detections were dropped: counter-based streams are addressed, not
    // sequential.
    const auto views = generate_rig(RigSpec{});
    MotionSpec motion_spec;
    motion_spec.frame_count = 4;
    const auto motion = generate_motion(motion_spec);

    ObservationSpec with_dropout;
    with_dropout.pixel_noise_sigma = 1.0;
    with_dropout.dropout_prob = 0.5;
    with_dropout.seed = 11;
    ObservationSpec without_dropout = with_dropout;
    without_dropout.dropout_prob = 0.0;

    std::map<std::tuple<int, int, int>, Vec2d> full;
    for (const auto& det : observe(views, motion, without_dropout)) {
      full[{det.frame_id, det.view_id, det.joint_id}] = det.pixel;
    }
    for (const auto& det : observe(views, motion, with_dropout)) {
      const auto it = full.find({det.frame_id, det.view_id, det.joint_id});
      REQUIRE(it != full.end());
      CHECK((det.pixel - it->second).norm() == 0.0);
    }
  }

  TEST_CASE("mpjpe matches a naive reference implementation") {
    MotionSpec spec;
    spec.seed = 43;
    spec.frame_count = 12;
    const auto gt_frames = generate_motion(spec);
    const auto gt = to_trajectories(gt_frames, spec.frame_rate);

    // Perturb deterministically and flag a few frames invalid / synthesized.
    auto est = gt;
    const CounterRng rng(91);
    for (std::size_t j = 0; j < est.size(); ++j) {
      est[j].synthesized.assign(static_cast<std::size_t>(spec.frame_count), 0);
      for (int t = 0; t < spec.frame_count; ++t) {
        est[j].positions[static_cast<std::size_t>(t)] +=
            0.01 * mvlm::test::random_vec3(rng, j, static_cast<std::uint64_t>(t), -1.0, 1.0);
      }
    }
    est[2].valid[3] = 0;
    est[5].synthesized[7] = 1;
    est[9].valid[0] = 0;

    double sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < est.size(); ++j) {
      for (int t = 0; t < spec.frame_count; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        if (!est[j].valid[ti] || est[j].synthesized[ti]) continue;
        sum += (est[j].positions[ti] - gt[j].positions[ti]).norm();
        ++count;
      }
    }
    CHECK(mpjpe(est, gt) == doctest::Approx(sum / count).epsilon(1e-14));

    // Including synthesized frames changes the count.
    double sum_inc = 0.0;
    int count_inc = 0;
    for (std::size_t j = 0; j < est.size(); ++j) {
      for (int t = 0; t < spec.frame_count; ++t) {
        const std::size_t ti = static_cast<std::size_t>(t);
        if (!est[j].valid[ti]) continue;
        sum_inc += (est[j].positions[ti] - gt[j].positions[ti]).norm();
        ++count_inc;
      }
    }
    CHECK(mpjpe(est, gt, true) == doctest::Approx(sum_inc / count_inc).epsilon(1e-14));
    CHECK(count_inc == count + 1);
  }

  TEST_CASE("mpjpe input validation") {
    MotionSpec spec;
    spec.frame_count = 4;
    const auto gt = to_trajectories(generate_motion(spec), spec.frame_rate);

    auto short_est = gt;
    short_est.pop_back();
    CHECK_THROWS_AS(mpjpe(short_est, gt), InputError);

    auto truncated = gt;
    truncated[0].positions.pop_back();
    truncated[0].valid.pop_back();
    CHECK_THROWS_AS(mpjpe(truncated, gt), InputError);

    auto invalid = gt;
    for (auto& traj : invalid) std::fill(traj.valid.begin(), traj.valid.end(), 0);
    CHECK_THROWS_AS(mpjpe(invalid, gt), EmptyTrajectoryError);
  }

  TEST_CASE("uniform offset gives mpjpe equal to the offset length") {
    MotionSpec spec;
    spec.frame_count = 6;
    const auto gt = to_trajectories(generate_motion(spec), spec.frame_rate);
    auto est = gt;
    const Vec3d offset(0.3, -0.4, 1.2);  // length 1.3
    for (auto& traj : est) {
      for (auto& p : traj.positions) p += offset;
    }
    CHECK(mpjpe(est, gt) == doctest::Approx(1.3).epsilon(1e-13));
  }

  TEST_CASE("mean_jitter measures frame-to-frame displacement") {
    LandmarkTrajectoryd traj;
    traj.joint_id = 0;
    traj.positions = {Vec3d(0, 0, 0), Vec3d(1, 0, 0), Vec3d(1, 2, 0), Vec3d(1, 2, 0)};
    traj.valid.assign(4, 1);
    const std::vector<LandmarkTrajectoryd> single = {traj};
    CHECK(mean_jitter(single) == doctest::Approx(1.0).epsilon(1e-14));

    LandmarkTrajectoryd lone;
    lone.positions = {Vec3d::Zero()};
    lone.valid.assign(1, 1);
    CHECK_THROWS_AS(mean_jitter({lone}), EmptyTrajectoryError);
  }
}
