#pragma once

#include <map>
#include <optional>
#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/rng.hpp"
#include "marknav/world.hpp"

namespace marknav::sim {

// 2D range scanner model. Beams start at the right edge of the field of view
// and sweep anti-clockwise; beam i has robot-relative bearing
// -fov/2 + i * fov/(beam_count-1).
struct LaserSpec {
  double fov = geo::deg2rad(240.0);
  double max_range = 3.5;       // meters
  int beam_count = 683;
  double noise_sigma = 0.0;     // gaussian range noise, meters
  double nan_rate = 0.0;
  double inf_rate = 0.0;

  void validate() const;
};

struct RawScan {
  std::vector<double> ranges;  // meters; +inf = out of range, NaN = dropout
  double fov = geo::deg2rad(240.0);

  double bearing(std::size_t i) const {
    return -fov / 2.0 + fov * static_cast<double>(i) /
                            static_cast<double>(ranges.size() - 1);
  }
};

// Marker detectability model. Each marker size has a tracking distance (full
// pose available) and a cutoff distance (detected, no pose). A face is usable
// within face_half_angle of its outward normal; the camera sees a horizontal
// window of camera_hfov about the current pan. `persistence` is the
// probability that the currently tracked marker keeps its pose estimate on a
// given frame. The noise bounds are uniform corruptions applied to tracked
// observations (zero by default).
struct RangeEntry {
  double tracking_m = 0.0;
  double cutoff_m = 0.0;
};

struct DetectionSpec {
  std::map<int, RangeEntry> ranges_by_size_cm = default_range_table();
  double camera_hfov = geo::deg2rad(82.0);
  double face_half_angle = geo::deg2rad(80.0);
  double persistence = 1.0;
  double noise_tz_m = 0.0;       // uniform in [-b, b] on the projected range
  double noise_yaw_rad = 0.0;    // uniform in [-b, b] on the marker yaw
  double height_diff_m = 2.0;    // marker hang height above the camera

  static std::map<int, RangeEntry> default_range_table();
  const RangeEntry& entry_for_size(double size_m) const;  // throws config if absent
  void validate() const;
};

enum class DetectionState { NotVisible, DetectedOnly, TrackedWithPose };

struct Detection {
  int marker_id = 0;
  int face = 0;
  DetectionState state = DetectionState::NotVisible;
  std::optional<geo::MarkerObservation> obs;  // present iff TrackedWithPose
};

// Evaluate every marker of the world against the camera at `robot_pose` with
// the turret at `turret`. Results are ordered by marker id. `tracked_id`
// identifies the marker the tracker is locked onto (persistence applies to
// it); pass nullopt when nothing is tracked.
std::vector<Detection> simulate_marker_detection(const world::WorldModel& w,
                                                 const geo::Pose2D& robot_pose,
                                                 const geo::TurretAngles& turret,
                                                 const DetectionSpec& spec, Rng& rng,
                                                 std::optional<int> tracked_id = std::nullopt);

// Simulate one scan from `robot_pose`. Throws invalid_pose when the pose lies
// inside an obstacle or out of bounds.
RawScan simulate_scan(const world::WorldModel& w, const geo::Pose2D& robot_pose,
                      const LaserSpec& spec, Rng& rng);
RawScan simulate_scan(const world::WorldModel& w, const geo::Pose2D& robot_pose,
                      const LaserSpec& spec, std::uint64_t rng_seed);

// Discrete PID: u = kp e + ki * sum(e dt) + kd * (e - e_prev)/dt. The
// integral includes the current sample; the derivative is zero on the first
// step.
struct PidController {
  double kp = 0.7;
  double ki = 0.0;
  double kd = 0.0;
  double integral = 0.0;
  double prev_error = 0.0;
  bool has_prev = false;

  void reset() {
    integral = 0.0;
    prev_error = 0.0;
    has_prev = false;
  }
};

double pid_step(PidController& ctrl, double error, double dt);

// Pan/tilt servo pair. Servo coordinates: pan in [10, 350] degrees with 180
// pointing along the robot heading (so robot-relative pan spans +-170 deg
// around forward with a 20 deg dead cone at the rear); tilt in [-70, 90].
// Unit mapping: pan (100, 3980) over (10, 350) deg, tilt (1248, 3072) over
// (-70, 90) deg.
class TurretServo {
 public:
  TurretServo();

  // Command robot-relative target angles. Tilt clamps to its limits; pan
  // wraps by +-360 deg into the servo range, and a target inside the dead
  // cone snaps to the nearer limit (the turret then travels the long way
  // around, matching the hardware behaviour).
  void command(const geo::TurretAngles& target);

  // Advance both axes one control step: each axis applies its PID output as
  // an angular increment, then clamps to the physical range.
  void step(double dt);

  geo::TurretAngles current() const;          // robot-relative radians
  geo::TurretAngles target() const;           // robot-relative radians
  double pan_servo_deg() const { return pan_deg_; }
  double tilt_servo_deg() const { return tilt_deg_; }
  bool settled(double tol_rad = 1e-4) const;

  PidController& pan_pid() { return pan_pid_; }
  PidController& tilt_pid() { return tilt_pid_; }

  static int pan_units(double servo_deg);
  static int tilt_units(double servo_deg);

 private:
  double pan_deg_ = 180.0;   // servo coordinates, degrees
  double tilt_deg_ = 0.0;
  double pan_target_deg_ = 180.0;
  double tilt_target_deg_ = 0.0;
  PidController pan_pid_;
  PidController tilt_pid_;
};

// Advance the turret one step (free-function face of TurretServo::step).
void turret_step(TurretServo& servo, double dt);

struct RobotState {
  geo::Pose2D pose;
  double v = 0.0;  // m/s
  double w = 0.0;  // rad/s
};

struct MotionLimits {
  double v_max = 0.5;
  double w_max = 1.5;
};

struct StepResult {
  RobotState state;
  bool collided = false;
};

// Unicycle integration of clamped velocity commands over dt (exact arc for
// nonzero angular rate). When the target cell is an obstacle the pose is left
// unchanged and `collided` is set.
StepResult robot_step(const world::WorldModel& w, const RobotState& state, double v_cmd,
                      double w_cmd, double dt, const MotionLimits& limits);

}  // namespace marknav::sim
