#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mvlm/image.hpp"
#include "mvlm/io.hpp"
#include "mvlm/random.hpp"
#include "mvlm/synthetic.hpp"
#include "test_support.hpp"

using namespace mvlm;
using mvlm::test::TempDir;
using mvlm::test::fixture_path;

namespace {

std::string slurp(const std::filesystem::path& path) { return read_file(path); }

TokenFile patterned_token_file() {
  TokenFile file;
  file.first_frame = 12;
  file.view_ids = {3, 7};
  file.bounds.min = Vec3d(-1.5, -2.0, 0.0);
  file.bounds.max = Vec3d(1.5, 2.0, 2.5);
  const CounterRng rng(71);
  for (int f = 0; f < 2; ++f) {
    for (std::size_t v = 0; v < file.view_ids.size(); ++v) {
      ConditioningTokenSet block;
      block.frame_id = file.first_frame + f;
      block.view_id = file.view_ids[v];
      for (int r = 0; r < kTokenCount; ++r) {
        for (int c = 0; c < kTokenWidth; ++c) {
          block.tokens(r, c) = static_cast<float>(rng.uniform(
              {static_cast<std::uint64_t>(f), v, static_cast<std::uint64_t>(r * 192 + c)}, -1.0,
              1.0));
        }
      }
      file.blocks.push_back(block);
    }
  }
  return file;
}

}  // namespace

TEST_SUITE("io_calibration") {
  TEST_CASE("golden rig file parses into the documented geometry") {
    const auto views = read_calibration(fixture_path("calibration_rig4.json"));
    REQUIRE(views.size() == 4);
    const Vec3d expected[4] = {{3.0, 0.0, 1.4}, {0.0, 3.0, 1.4}, {-3.0, 0.0, 1.4}, {0.0, -3.0, 1.4}};
    for (int i = 0; i < 4; ++i) {
      const CameraViewd& view = views[static_cast<std::size_t>(i)];
      CHECK(view.view_id == i);
      CHECK_NOTHROW(validate(view));
      CHECK((camera_center(view) - expected[i]).norm() < 1e-9);
      CHECK(view.intrinsics(0, 0) == doctest::Approx(420.0));
      CHECK(view.image_size.x() == 384);
      CHECK(view.image_size.y() == 512);
    }
  }

  TEST_CASE("write / read round trip is exact and byte-stable") {
    TempDir tmp("calib");
    RigSpec spec;
    spec.camera_count = 3;
    spec.heights = {1.2, 1.6};
    const auto views = generate_rig(spec);

    const auto path_a = tmp / "a.json";
    const auto path_b = tmp / "b.json";
    write_calibration(path_a, views);
    const auto reread = read_calibration(path_a);
    REQUIRE(reread.size() == views.size());
    for (std::size_t i = 0; i < views.size(); ++i) {
      CHECK(reread[i].view_id == views[i].view_id);
      CHECK((reread[i].intrinsics - views[i].intrinsics).norm() == 0.0);
      CHECK((reread[i].rotation - views[i].rotation).norm() == 0.0);
      CHECK((reread[i].translation - views[i].translation).norm() == 0.0);
      CHECK(reread[i].image_size == views[i].image_size);
    }
    write_calibration(path_b, reread);
    CHECK(slurp(path_a) == slurp(path_b));
  }

  TEST_CASE("reflection rotations are refused with the offending view named") {
    try {
      read_calibration(fixture_path("calibration_reflection.json"));
      FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
      CHECK(std::string(e.what()).find("view 0") != std::string::npos);
    }
  }

  TEST_CASE("missing fields are parse errors that name the field") {
    try {
      read_calibration(fixture_path("calibration_missing_field.json"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("translation") != std::string::npos);
    }
  }

  TEST_CASE("duplicate view ids are refused") {
    try {
      read_calibration(fixture_path("calibration_duplicate_view.json"));
      FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
      CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
  }

  TEST_CASE("version and format tags are enforced") {
    CHECK_THROWS_AS(read_calibration(fixture_path("calibration_bad_version.json")), ParseError);
    CHECK_THROWS_AS(parse_calibration("{\"format\": \"something-else\", \"version\": 1}"),
                    ParseError);
    CHECK_THROWS_AS(parse_calibration("{}"), ParseError);
  }

  TEST_CASE("malformed JSON reports a byte offset") {
    try {
      parse_calibration("{\"format\": \"mvlm-calibration\", ");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.byte_offset > 0);
    }
  }

  TEST_CASE("missing file raises IoError") {
    CHECK_THROWS_AS(read_calibration(fixture_path("does_not_exist.json")), IoError);
  }
}

TEST_SUITE("io_detections") {
  TEST_CASE("basic frame: all 25 joints with exact values") {
    const auto result = read_openpose_frame(fixture_path("detections_basic.json"), 7, 2);
    CHECK(result.warning.empty());
    REQUIRE(result.detections.size() == 25);
    for (int j = 0; j < 25; ++j) {
      const Detection2Dd& det = result.detections[static_cast<std::size_t>(j)];
      CHECK(det.joint_id == j);
      CHECK(det.frame_id == 7);
      CHECK(det.view_id == 2);
      CHECK(det.pixel.x() == 10.0 * j + 1.0);
      CHECK(det.pixel.y() == 10.0 * j + 2.0);
      CHECK(det.confidence == (j % 4) * 0.25);
    }
  }

  TEST_CASE("empty people array is a valid empty frame") {
    const auto result = read_openpose_frame(fixture_path("detections_empty_people.json"), 0, 0);
    CHECK(result.detections.empty());
    CHECK(result.warning.empty());
  }

  TEST_CASE("multi-person frames keep the highest-total-confidence person") {
    const auto result = read_openpose_frame(fixture_path("detections_multi_person.json"), 0, 0);
    REQUIRE(result.detections.size() == 25);
    CHECK(result.warning.find("kept person 1 of 2") != std::string::npos);
    for (int j = 0; j < 25; ++j) {
      const Detection2Dd& det = result.detections[static_cast<std::size_t>(j)];
      CHECK(det.pixel.x() == 100.0 + j);
      CHECK(det.pixel.y() == 200.0 + j);
      CHECK(det.confidence == 0.8);
    }
  }

  TEST_CASE("zero-confidence keypoints are preserved, not dropped") {
    const auto result = read_openpose_frame(fixture_path("detections_zero_conf.json"), 0, 0);
    REQUIRE(result.detections.size() == 25);
    for (int j = 0; j < 3; ++j) {
      CHECK(result.detections[static_cast<std::size_t>(j)].confidence == 0.0);
    }
    for (int j = 3; j < 25; ++j) {
      CHECK(result.detections[static_cast<std::size_t>(j)].confidence == 1.0);
    }
  }

  TEST_CASE("malformed inputs are rejected with diagnostics") {
    SUBCASE("wrong keypoint count") {
      try {
        read_openpose_frame(fixture_path("detections_wrong_count.json"), 0, 0);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("75") != std::string::npos);
      }
    }
    SUBCASE("missing pose_keypoints_2d") {
      try {
        read_openpose_frame(fixture_path("detections_missing_field.json"), 0, 0);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("pose_keypoints_2d") != std::string::npos);
      }
    }
    SUBCASE("non-numeric keypoint value") {
      CHECK_THROWS_AS(read_openpose_frame(fixture_path("detections_bad_value.json"), 0, 0),
                      ParseError);
    }
    SUBCASE("truncated JSON carries a byte offset") {
      try {
        read_openpose_frame(fixture_path("detections_malformed.json"), 0, 0);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(e.byte_offset > 0);
      }
    }
    SUBCASE("people must be an array") {
      CHECK_THROWS_AS(parse_openpose_frame("{\"people\": 3}"), ParseError);
      CHECK_THROWS_AS(parse_openpose_frame("{\"persons\": []}"), ParseError);
    }
  }

  TEST_CASE("out-of-range confidences are clamped to [0, 1]") {
    std::string doc = "{\"people\": [{\"pose_keypoints_2d\": [";
    for (int j = 0; j < 25; ++j) {
      if (j > 0) doc += ",";
      doc += "1.0,2.0,";
      doc += (j == 0 ? "1.5" : (j == 1 ? "-0.5" : "0.5"));
    }
    doc += "]}]}";
    const auto result = parse_openpose_frame(doc);
    CHECK(result.detections[0].confidence == 1.0);
    CHECK(result.detections[1].confidence == 0.0);
    CHECK(result.detections[2].confidence == 0.5);
  }

  TEST_CASE("write / parse round trip preserves detections") {
    TempDir tmp("det");
    std::vector<Detection2Dd> detections;
    for (int j = 0; j < 25; j += 2) {  // leave odd joints missing
      Detection2Dd det;
      det.pixel = Vec2d(3.5 * j + 0.125, 7.25 * j);
      det.confidence = 0.5 + 0.015625 * j;
      det.joint_id = j;
      detections.push_back(det);
    }
    const auto path = tmp / "frame.json";
    write_openpose_frame(path, detections);

    const auto result = read_openpose_frame(path, 4, 9);
    REQUIRE(result.detections.size() == 25);
    for (int j = 0; j < 25; ++j) {
      const Detection2Dd& det = result.detections[static_cast<std::size_t>(j)];
      if (j % 2 == 0) {
        CHECK(det.pixel.x() == 3.5 * j + 0.125);
        CHECK(det.pixel.y() == 7.25 * j);
        CHECK(det.confidence == 0.5 + 0.015625 * j);
      } else {
        // Missing joints take the detector's (0, 0, 0) convention.
        CHECK(det.pixel.x() == 0.0);
        CHECK(det.pixel.y() == 0.0);
        CHECK(det.confidence == 0.0);
      }
    }
  }
}

TEST_SUITE("io_trajectories") {
  TEST_CASE("raw round trip preserves values and flags") {
    TempDir tmp("traj");
    TrajectorySet set;
    set.first_frame = 3;
    set.frame_rate = 25.0;
    const CounterRng rng(72);
    for (int j = 0; j < 4; ++j) {
      LandmarkTrajectoryd traj;
      traj.joint_id = j;
      traj.frame_rate = 25.0;
      for (int t = 0; t < 6; ++t) {
        traj.positions.push_back(
            mvlm::test::random_vec3(rng, static_cast<std::uint64_t>(j),
                                    static_cast<std::uint64_t>(t), -2.0, 2.0));
        traj.valid.push_back(1);
        traj.synthesized.push_back(0);
      }
      set.raw.push_back(traj);
    }
    set.raw[1].valid[2] = 0;      // one hole
    set.raw[2].synthesized[4] = 1;

    const auto path = tmp / "trajectory.json";
    write_trajectories(path, set);
    const TrajectorySet reread = read_trajectories(path);

    CHECK(reread.first_frame == 3);
    CHECK(reread.frame_rate == 25.0);
    CHECK(!reread.has_smoothed());
    REQUIRE(reread.raw.size() == 4);
    for (int j = 0; j < 4; ++j) {
      const auto& a = set.raw[static_cast<std::size_t>(j)];
      const auto& b = reread.raw[static_cast<std::size_t>(j)];
      CHECK(b.joint_id == a.joint_id);
      REQUIRE(b.positions.size() == a.positions.size());
      for (std::size_t t = 0; t < a.positions.size(); ++t) {
        CHECK(b.valid[t] == a.valid[t]);
        CHECK(b.synthesized[t] == a.synthesized[t]);
        if (a.valid[t]) {
          // Grisu2 shortest round-trip: doubles survive exactly.
          CHECK((b.positions[t] - a.positions[t]).norm() == 0.0);
        } else {
          CHECK(b.positions[t] == Vec3d::Zero());
        }
      }
    }

    // Re-serialization is byte-identical.
    const auto path_b = tmp / "again.json";
    write_trajectories(path_b, reread);
    CHECK(slurp(path) == slurp(path_b));
  }

  TEST_CASE("smoothed series rides along when present") {
    TempDir tmp("traj_s");
    TrajectorySet set;
    set.first_frame = 0;
    set.frame_rate = 30.0;
    for (int j = 0; j < 2; ++j) {
      LandmarkTrajectoryd traj;
      traj.joint_id = j;
      for (int t = 0; t < 5; ++t) {
        traj.positions.push_back(Vec3d(j + 0.25 * t, -t, 0.5));
        traj.valid.push_back(1);
      }
      set.raw.push_back(traj);
      for (auto& p : traj.positions) p += Vec3d(0.001, 0.0, 0.0);
      set.smoothed.push_back(traj);
    }
    const auto path = tmp / "trajectory.json";
    write_trajectories(path, set);
    const TrajectorySet reread = read_trajectories(path);
    REQUIRE(reread.has_smoothed());
    REQUIRE(reread.smoothed.size() == 2);
    for (int j = 0; j < 2; ++j) {
      for (std::size_t t = 0; t < 5; ++t) {
        CHECK((reread.smoothed[static_cast<std::size_t>(j)].positions[t] -
               set.smoothed[static_cast<std::size_t>(j)].positions[t])
                  .norm() == 0.0);
      }
    }
  }

  TEST_CASE("schema violations are parse errors") {
    CHECK_THROWS_AS(parse_trajectories("{\"format\": \"wrong\", \"version\": 1}"), ParseError);
    CHECK_THROWS_AS(
        parse_trajectories("{\"format\": \"mvlm-trajectory\", \"version\": 2, \"joint_count\": 0, "
                           "\"frame_count\": 0, \"first_frame\": 0, \"frame_rate\": 30, "
                           "\"joints\": []}"),
        ParseError);
    // joint_count disagrees with the array length.
    CHECK_THROWS_AS(
        parse_trajectories("{\"format\": \"mvlm-trajectory\", \"version\": 1, \"joint_count\": 2, "
                           "\"frame_count\": 0, \"first_frame\": 0, \"frame_rate\": 30, "
                           "\"joints\": []}"),
        ParseError);
    // Mixed smoothed presence.
    CHECK_THROWS_AS(
        parse_trajectories(
            "{\"format\": \"mvlm-trajectory\", \"version\": 1, \"joint_count\": 2, "
            "\"frame_count\": 1, \"first_frame\": 0, \"frame_rate\": 30, \"joints\": ["
            "{\"joint_id\": 0, \"raw\": [[0,0,0,true,false]], \"smoothed\": [[0,0,0]]},"
            "{\"joint_id\": 1, \"raw\": [[0,0,0,true,false]]}]}"),
        ParseError);
    // Malformed frame entry.
    CHECK_THROWS_AS(
        parse_trajectories("{\"format\": \"mvlm-trajectory\", \"version\": 1, \"joint_count\": 1, "
                           "\"frame_count\": 1, \"first_frame\": 0, \"frame_rate\": 30, "
                           "\"joints\": [{\"joint_id\": 0, \"raw\": [[0,0,0]]}]}"),
        ParseError);
  }

  TEST_CASE("writer input validation") {
    TempDir tmp("traj_bad");
    TrajectorySet empty;
    CHECK_THROWS_AS(write_trajectories(tmp / "x.json", empty), EmptyTrajectoryError);

    TrajectorySet ragged;
    LandmarkTrajectoryd a;
    a.positions = {Vec3d::Zero(), Vec3d::Zero()};
    a.valid = {1, 1};
    LandmarkTrajectoryd b = a;
    b.positions.push_back(Vec3d::Zero());
    b.valid.push_back(1);
    ragged.raw = {a, b};
    CHECK_THROWS_AS(write_trajectories(tmp / "y.json", ragged), InputError);
  }
}

TEST_SUITE("io_tokens") {
  TEST_CASE("round trip is bit-exact") {
    TempDir tmp("tok");
    const TokenFile file = patterned_token_file();
    const auto path = tmp / "tokens.bin";
    write_tokens(path, file);

    const TokenFile reread = read_tokens(path);
    CHECK(reread.first_frame == file.first_frame);
    CHECK(reread.view_ids == file.view_ids);
    CHECK((reread.bounds.min - file.bounds.min).norm() == 0.0);
    CHECK((reread.bounds.max - file.bounds.max).norm() == 0.0);
    REQUIRE(reread.blocks.size() == file.blocks.size());
    CHECK(reread.frame_count() == 2);
    for (std::size_t i = 0; i < file.blocks.size(); ++i) {
      CHECK(reread.blocks[i].frame_id == file.blocks[i].frame_id);
      CHECK(reread.blocks[i].view_id == file.blocks[i].view_id);
      CHECK(std::memcmp(reread.blocks[i].tokens.data(), file.blocks[i].tokens.data(),
                        sizeof(float) * kTokenCount * kTokenWidth) == 0);
    }

    const auto path_b = tmp / "again.bin";
    write_tokens(path_b, reread);
    CHECK(slurp(path) == slurp(path_b));
  }

  TEST_CASE("golden token file decodes to the analytic block") {
    const TokenFile file = read_tokens(fixture_path("tokens_golden.bin"));
    CHECK(file.first_frame == 5);
    REQUIRE(file.view_ids == std::vector<int>{0});
    REQUIRE(file.blocks.size() == 1);
    CHECK(file.bounds.min == Vec3d(-1.0, -1.0, -1.0));
    CHECK(file.bounds.max == Vec3d(1.0, 1.0, 1.0));

    const auto& tokens = file.blocks[0].tokens;
    // Row 0: identity rotation. Leading SH entry is Y_0^0 = 1/(2 sqrt(pi)).
    CHECK(tokens(0, 0) == doctest::Approx(0.28209479f).epsilon(1e-6));
    // Roll harmonics: (sin, cos) pairs of zero roll, living after the SH block.
    const int sh_width = 169;
    for (int n = 0; n < 8; ++n) {
      CHECK(tokens(0, sh_width + 2 * n) == 0.0f);
      CHECK(tokens(0, sh_width + 2 * n + 1) == 1.0f);
    }
    CHECK(tokens(0, 185) == 0.0f);
    CHECK(tokens(0, 191) == 0.0f);
    // Row 1: camera translation at the box center: the (0, 1) comb.
    for (int i = 0; i < kTokenWidth; i += 2) {
      CHECK(tokens(1, i) == 0.0f);
      CHECK(tokens(1, i + 1) == 1.0f);
    }
    // Row 2: joint 0 pinned at (1, 0, 0): component 0 is (sin, cos) of
    // doubling multiples of pi, components 1-2 are the comb.
    CHECK(tokens(2, 1) == -1.0f);
    CHECK(std::abs(tokens(2, 0)) < 1e-6f);
    CHECK(tokens(2, 64) == 0.0f);  // component 1 sin, back on the comb
    CHECK(tokens(2, 65) == 1.0f);  // component 1 cos
    // Rows 3..26: joints at the center.
    for (int row = 3; row < kTokenCount; ++row) {
      for (int i = 0; i < kTokenWidth; i += 2) {
        CHECK(tokens(row, i) == 0.0f);
        CHECK(tokens(row, i + 1) == 1.0f);
      }
    }
  }

  TEST_CASE("corrupted files are rejected") {
    TempDir tmp("tok_bad");
    const TokenFile file = patterned_token_file();
    const auto path = tmp / "tokens.bin";
    write_tokens(path, file);
    const std::string bytes = slurp(path);

    SUBCASE("bad magic") {
      std::string mutated = bytes;
      mutated[0] = 'X';
      const auto bad = tmp / "bad_magic.bin";
      write_file(bad, mutated);
      CHECK_THROWS_AS(read_tokens(bad), ParseError);
    }
    SUBCASE("unsupported version") {
      std::string mutated = bytes;
      mutated[4] = 9;
      const auto bad = tmp / "bad_version.bin";
      write_file(bad, mutated);
      CHECK_THROWS_AS(read_tokens(bad), ParseError);
    }
    SUBCASE("truncation mid-block") {
      const auto bad = tmp / "truncated.bin";
      write_file(bad, bytes.substr(0, bytes.size() - 100));
      try {
        read_tokens(bad);
        FAIL("expected ParseError");
      } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("truncated") != std::string::npos);
        CHECK(e.byte_offset > 0);
      }
    }
    SUBCASE("trailing garbage") {
      const auto bad = tmp / "trailing.bin";
      write_file(bad, bytes + "extra");
      CHECK_THROWS_AS(read_tokens(bad), ParseError);
    }
  }

  TEST_CASE("writer input validation") {
    TempDir tmp("tok_val");
    TokenFile file;
    CHECK_THROWS_AS(write_tokens(tmp / "x.bin", file), InputError);

    file = patterned_token_file();
    file.blocks.pop_back();  // 3 blocks over 2 views
    CHECK_THROWS_AS(write_tokens(tmp / "y.bin", file), InputError);

    file = patterned_token_file();
    file.bounds = BoundingBoxd{};  // never expanded: invalid
    CHECK_THROWS_AS(write_tokens(tmp / "z.bin", file), InputError);
  }
}

TEST_SUITE("io_ppm") {
  TEST_CASE("write / read round trip") {
    TempDir tmp("ppm");
    Image8 image(5, 4);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
      image.pixels[i] = static_cast<std::uint8_t>((i * 7 + 3) % 256);
    }
    const auto path = tmp / "img.ppm";
    write_ppm(path, image);
    const Image8 reread = read_ppm(path);
    CHECK(reread.width == 5);
    CHECK(reread.height == 4);
    CHECK(reread.pixels == image.pixels);

    // Header bytes are the canonical P6 layout.
    const std::string bytes = slurp(path);
    CHECK(bytes.substr(0, 11) == "P6\n5 4\n255\n");
    CHECK(bytes.size() == 11 + 5 * 4 * 3);
  }

  TEST_CASE("comments in the header are tolerated") {
    TempDir tmp("ppm_c");
    const auto path = tmp / "img.ppm";
    std::string bytes = "P6 # binary pixmap\n# size next\n2 2\n255\n";
    bytes += std::string(12, '\x41');
    write_file(path, bytes);
    const Image8 image = read_ppm(path);
    CHECK(image.width == 2);
    CHECK(image.height == 2);
    CHECK(image.pixels == std::vector<std::uint8_t>(12, 0x41));
  }

  TEST_CASE("malformed rasters are rejected") {
    TempDir tmp("ppm_bad");
    SUBCASE("wrong magic") {
      const auto path = tmp / "p5.ppm";
      write_file(path, "P5\n2 2\n255\n" + std::string(12, 'a'));
      CHECK_THROWS_AS(read_ppm(path), ParseError);
    }
    SUBCASE("unsupported maxval") {
      const auto path = tmp / "maxval.ppm";
      write_file(path, "P6\n2 2\n254\n" + std::string(12, 'a'));
      CHECK_THROWS_AS(read_ppm(path), ParseError);
    }
    SUBCASE("short payload") {
      const auto path = tmp / "short.ppm";
      write_file(path, "P6\n2 2\n255\n" + std::string(11, 'a'));
      CHECK_THROWS_AS(read_ppm(path), ParseError);
    }
  }
}

TEST_SUITE("io_files") {
  TEST_CASE("frame / view stems are zero-padded") {
    CHECK(frame_view_stem(7, 3) == "000007_003");
    CHECK(frame_view_stem(123456, 99) == "123456_099");
    CHECK(frame_view_stem(0, 0) == "000000_000");
  }

  TEST_CASE("write_file creates parent directories") {
    TempDir tmp("files");
    const auto nested = tmp.path() / "a" / "b" / "c.txt";
    write_file(nested, "payload");
    CHECK(read_file(nested) == "payload");
  }

  TEST_CASE("read_file on a missing path raises IoError") {
    TempDir tmp("files_missing");
    CHECK_THROWS_AS(read_file(tmp / "nope.bin"), IoError);
  }
}
