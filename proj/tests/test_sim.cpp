#include <doctest.h>

#include <cmath>
#include <cstring>

#include "marknav/sim.hpp"
#include "support.hpp"

using namespace marknav;
using geo::deg2rad;
using testsup::make_corridor;
using testsup::make_marker;
using testsup::make_room;

TEST_CASE("scan in an empty box: everything out of range") {
  const world::WorldModel w = make_room(200, 200);  // 10 m x 10 m
  sim::LaserSpec spec;
  spec.beam_count = 181;
  Rng rng(1);
  const sim::RawScan scan = sim::simulate_scan(w, {5.0, 5.0, 0.0}, spec, rng);
  for (double r : scan.ranges) CHECK(std::isinf(r));
}

TEST_CASE("scan sees a wall at exactly 1 m") {
  // Free interior 0..10 m; wall face at x = 10 m. Robot 1 m before it.
  const world::WorldModel w = make_room(200, 200);
  sim::LaserSpec spec;
  spec.beam_count = 3;
  spec.fov = deg2rad(240.0);
  Rng rng(1);
  const sim::RawScan scan = sim::simulate_scan(w, {9.0, 5.0, 0.0}, spec, rng);
  // Middle beam looks straight ahead (+x).
  CHECK(scan.ranges[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("scan ordering is anti-clockwise from the right") {
  // Robot near the right wall, heading +y: beam 0 points right (+x), hits the
  // near wall; the last beam points further left.
  const world::WorldModel w = make_room(200, 100);
  sim::LaserSpec spec;
  spec.beam_count = 5;
  spec.fov = deg2rad(240.0);
  Rng rng(1);
  const sim::RawScan scan = sim::simulate_scan(w, {9.5, 2.5, deg2rad(90.0)}, spec, rng);
  CHECK(scan.bearing(0) == doctest::Approx(-deg2rad(120.0)));
  CHECK(scan.bearing(4) == doctest::Approx(deg2rad(120.0)));
  // Beam at relative -90 deg (index 1 bearing -60... compute: -120 + i*60).
  // Index 1 -> -60 deg; robot heading 90 -> world bearing 30 deg. Just check
  // the rightmost beam hits the wall 0.5 m away at world bearing -30 deg:
  // range = 0.5 / cos(30 deg).
  CHECK(scan.ranges[0] == doctest::Approx(0.5 / std::cos(deg2rad(30.0))).epsilon(1e-6));
}

TEST_CASE("scan determinism and pose validation") {
  const world::WorldModel w = make_room(100, 60);
  sim::LaserSpec spec;
  spec.noise_sigma = 0.02;
  spec.nan_rate = 0.05;
  spec.inf_rate = 0.05;
  spec.beam_count = 241;
  const sim::RawScan a = sim::simulate_scan(w, {1.0, 1.0, 0.3}, spec, std::uint64_t{99});
  const sim::RawScan b = sim::simulate_scan(w, {1.0, 1.0, 0.3}, spec, std::uint64_t{99});
  REQUIRE(a.ranges.size() == b.ranges.size());
  for (std::size_t i = 0; i < a.ranges.size(); ++i) {
    // Bitwise identity, NaN-aware.
    CHECK(std::memcmp(&a.ranges[i], &b.ranges[i], sizeof(double)) == 0);
  }
  CHECK_THROWS_AS(sim::simulate_scan(w, {-1.0, -1.0, 0}, spec, std::uint64_t{1}), Error);
}

TEST_CASE("detection tiers follow the range model") {
  world::WorldModel w = make_room(400, 100);  // 20 m x 5 m
  w.markers.push_back(make_marker(0, 0.5, 2.5, 0.0));  // 20 cm, faces +x
  sim::DetectionSpec spec;
  Rng rng(5);
  const auto at_distance = [&](double d) {
    const geo::Pose2D robot{0.5 + d, 2.5, geo::kPi};  // facing the marker
    const geo::TurretAngles turret{0.0, std::atan2(spec.height_diff_m, d)};
    const auto dets = sim::simulate_marker_detection(w, robot, turret, spec, rng, 0);
    REQUIRE(dets.size() == 1);
    return dets[0].state;
  };
  CHECK(at_distance(4.0) == sim::DetectionState::TrackedWithPose);
  CHECK(at_distance(5.0) == sim::DetectionState::DetectedOnly);
  CHECK(at_distance(9.0) == sim::DetectionState::NotVisible);
}

TEST_CASE("detection respects occlusion, face angle and camera fov") {
  world::WorldModel w = make_room(200, 200);
  w.markers.push_back(make_marker(0, 5.0, 5.0, 0.0, 0.2, 1));  // single face, +x normal
  sim::DetectionSpec spec;
  Rng rng(5);

  // Clear, square-on.
  auto dets = sim::simulate_marker_detection(w, {7.0, 5.0, geo::kPi}, {0, 0}, spec, rng);
  CHECK(dets[0].state == sim::DetectionState::TrackedWithPose);

  // Behind the face (single-face marker): not visible.
  dets = sim::simulate_marker_detection(w, {3.0, 5.0, 0.0}, {0, 0}, spec, rng);
  CHECK(dets[0].state == sim::DetectionState::NotVisible);

  // Camera pointed away: outside the horizontal fov.
  dets = sim::simulate_marker_detection(w, {7.0, 5.0, 0.0}, {0, 0}, spec, rng);
  CHECK(dets[0].state == sim::DetectionState::NotVisible);

  // Occluded by a pillar between robot and marker.
  world::WorldModel blocked = w;
  testsup::carve_rect(blocked, 118, 95, 122, 105, true);  // pillar at x~6 m
  dets = sim::simulate_marker_detection(blocked, {7.0, 5.0, geo::kPi}, {0, 0}, spec, rng);
  CHECK(dets[0].state == sim::DetectionState::NotVisible);
}

TEST_CASE("detection monotonicity: closer is never worse") {
  world::WorldModel w = make_room(400, 100);
  w.markers.push_back(make_marker(0, 0.5, 2.5, 0.0));
  sim::DetectionSpec spec;
  Rng rng(5);
  int last_rank = 2;  // 2 = tracked, 1 = detected, 0 = not visible
  for (double d = 0.3; d < 10.0; d += 0.1) {
    const geo::Pose2D robot{0.5 + d, 2.5, geo::kPi};
    const geo::TurretAngles turret{0.0, std::atan2(spec.height_diff_m, d)};
    const auto dets = sim::simulate_marker_detection(w, robot, turret, spec, rng, 0);
    const int rank = dets[0].state == sim::DetectionState::TrackedWithPose ? 2
                     : dets[0].state == sim::DetectionState::DetectedOnly ? 1
                                                                          : 0;
    CHECK(rank <= last_rank);
    last_rank = rank;
  }
}

TEST_CASE("range table is monotone in marker size") {
  const sim::DetectionSpec spec;
  double prev_track = 0, prev_cut = 0;
  for (const auto& [size, e] : spec.ranges_by_size_cm) {
    CHECK(e.tracking_m > prev_track);
    CHECK(e.cutoff_m > prev_cut);
    CHECK(e.cutoff_m > e.tracking_m);
    prev_track = e.tracking_m;
    prev_cut = e.cutoff_m;
  }
}

TEST_CASE("persistence downgrades only the tracked marker") {
  world::WorldModel w = make_room(200, 100);
  w.markers.push_back(make_marker(0, 2.0, 2.5, 0.0));
  sim::DetectionSpec spec;
  spec.persistence = 0.0;  // tracked marker always loses its pose
  Rng rng(5);
  const geo::Pose2D robot{4.0, 2.5, geo::kPi};
  const geo::TurretAngles turret{0.0, std::atan2(spec.height_diff_m, 2.0)};
  auto dets = sim::simulate_marker_detection(w, robot, turret, spec, rng, 0);
  CHECK(dets[0].state == sim::DetectionState::DetectedOnly);
  // Not the tracked marker: unaffected.
  dets = sim::simulate_marker_detection(w, robot, turret, spec, rng, 7);
  CHECK(dets[0].state == sim::DetectionState::TrackedWithPose);
}

TEST_CASE("tracked observation inverts to the true pose") {
  world::WorldModel w = make_room(200, 100);
  w.markers.push_back(make_marker(3, 2.0, 2.5, -90.0));
  const geo::MarkerDatabase db = w.database();
  sim::DetectionSpec spec;
  Rng rng(5);
  const geo::Pose2D robot{4.5, 1.0, deg2rad(135.0)};
  const double d = std::hypot(2.0 - robot.x, 2.5 - robot.y);
  const double pan = geo::normalize_angle(std::atan2(2.5 - robot.y, 2.0 - robot.x) - robot.theta);
  const geo::TurretAngles turret{pan, std::atan2(spec.height_diff_m, d)};
  const auto dets = sim::simulate_marker_detection(w, robot, turret, spec, rng, 3);
  REQUIRE(dets[0].state == sim::DetectionState::TrackedWithPose);
  const geo::Pose2D rec =
      geo::robot_pose_from_marker(*dets[0].obs, turret, db, 3, dets[0].face);
  CHECK(rec.x == doctest::Approx(robot.x).epsilon(1e-9));
  CHECK(rec.y == doctest::Approx(robot.y).epsilon(1e-9));
  CHECK(std::abs(geo::normalize_angle(rec.theta - robot.theta)) < 1e-9);
}

TEST_CASE("pid examples") {
  sim::PidController pid;
  pid.kp = 0.7;
  CHECK(sim::pid_step(pid, deg2rad(10.0), 1.0 / 30) == doctest::Approx(deg2rad(7.0)));
  pid.reset();
  CHECK(sim::pid_step(pid, 0.0, 0.1) == 0.0);

  sim::PidController pi;
  pi.kp = 1.0;
  pi.ki = 1.0;
  CHECK(sim::pid_step(pi, 1.0, 1.0) == doctest::Approx(2.0));
  CHECK(sim::pid_step(pi, 1.0, 1.0) == doctest::Approx(3.0));

  sim::PidController bad;
  CHECK_THROWS_AS(sim::pid_step(bad, std::numeric_limits<double>::quiet_NaN(), 0.1), Error);
}

TEST_CASE("turret wrap and clamp rules") {
  sim::TurretServo servo;
  // Servo coordinates: command 370 deg (robot-relative 190 deg) wraps to 10.
  servo.command({deg2rad(190.0), 0.0});
  CHECK(servo.pan_servo_deg() == doctest::Approx(180.0));  // still at start
  CHECK(geo::rad2deg(servo.target().pan) == doctest::Approx(10.0 - 180.0));
  // Tilt clamps to its limit.
  servo.command({0.0, deg2rad(120.0)});
  CHECK(geo::rad2deg(servo.target().tilt) == doctest::Approx(90.0));
  servo.command({0.0, deg2rad(-100.0)});
  CHECK(geo::rad2deg(servo.target().tilt) == doctest::Approx(-70.0));
}

TEST_CASE("servo converges with monotone error and no sign reversal") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    sim::TurretServo servo;
    const double target = rng.uniform(-2.8, 2.8);
    servo.command({target, rng.uniform(geo::kTiltMin, geo::kTiltMax)});
    double prev_err = std::abs(geo::normalize_angle(servo.current().pan - servo.target().pan));
    const double sign0 = geo::normalize_angle(servo.target().pan - servo.current().pan) >= 0 ? 1 : -1;
    for (int i = 0; i < 60; ++i) {
      servo.step(1.0 / 30);
      const double err = geo::normalize_angle(servo.target().pan - servo.current().pan);
      CHECK(std::abs(err) <= prev_err + 1e-12);
      if (std::abs(err) > 1e-9) CHECK(err * sign0 >= -1e-12);
      prev_err = std::abs(err);
    }
    CHECK(prev_err < 1e-6);
  }
}

TEST_CASE("turret unit mapping endpoints") {
  CHECK(sim::TurretServo::pan_units(10.0) == 100);
  CHECK(sim::TurretServo::pan_units(350.0) == 3980);
  CHECK(sim::TurretServo::tilt_units(-70.0) == 1248);
  CHECK(sim::TurretServo::tilt_units(90.0) == 3072);
}

TEST_CASE("robot_step kinematics") {
  const world::WorldModel w = make_room(200, 200);
  const sim::MotionLimits lim{2.0, 3.0};
  sim::RobotState s{{1.0, 1.0, 0.0}, 0, 0};

  auto r = sim::robot_step(w, s, 1.0, 0.0, 1.0, lim);
  CHECK(r.state.pose.x == doctest::Approx(2.0));
  CHECK(r.state.pose.y == doctest::Approx(1.0));
  CHECK_FALSE(r.collided);

  r = sim::robot_step(w, s, 0.0, geo::kPi / 2, 1.0, lim);
  CHECK(r.state.pose.theta == doctest::Approx(geo::kPi / 2));
  CHECK(r.state.pose.x == doctest::Approx(1.0));

  // Commands clamp to the configured limits.
  r = sim::robot_step(w, s, 10.0, 0.0, 0.1, lim);
  CHECK(r.state.v == doctest::Approx(2.0));
}

TEST_CASE("robot_step integrates an exact arc") {
  const world::WorldModel w = make_room(200, 200);
  const sim::MotionLimits lim{2.0, 3.0};
  sim::RobotState s{{5.0, 5.0, 0.0}, 0, 0};
  const int steps = 777;
  const double total_t = geo::kPi / 2;  // quarter circle at v=w=1
  for (int i = 0; i < steps; ++i) {
    const auto r = sim::robot_step(w, s, 1.0, 1.0, total_t / steps, lim);
    REQUIRE_FALSE(r.collided);
    s = r.state;
  }
  // Unit-radius arc centered at (5, 6): endpoint (6, 6) heading 90 deg.
  CHECK(s.pose.x == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(s.pose.y == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(s.pose.theta == doctest::Approx(geo::kPi / 2).epsilon(1e-9));
}

TEST_CASE("robot_step reports collisions and leaves the pose unchanged") {
  const world::WorldModel w = make_room(40, 40);  // 2 m x 2 m
  const sim::MotionLimits lim{5.0, 3.0};
  const sim::RobotState s{{1.9, 1.0, 0.0}, 0, 0};
  const auto r = sim::robot_step(w, s, 5.0, 0.0, 1.0, lim);
  CHECK(r.collided);
  CHECK(r.state.pose.x == doctest::Approx(1.9));
  CHECK(r.state.v == 0.0);
}
