#include "marknav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace marknav::sim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

void LaserSpec::validate() const {
  if (!(fov > 0.0 && fov <= geo::kTwoPi)) fail(Errc::config, "laser fov must be in (0, 360] deg");
  if (max_range <= 0.0) fail(Errc::config, "laser max_range must be positive");
  if (beam_count < 2) fail(Errc::config, "laser beam_count must be >= 2");
  if (nan_rate < 0 || nan_rate > 1 || inf_rate < 0 || inf_rate > 1 ||
      nan_rate + inf_rate > 1.0)
    fail(Errc::config, "laser corruption rates must be probabilities");
  if (noise_sigma < 0) fail(Errc::config, "laser noise sigma must be >= 0");
}

std::map<int, RangeEntry> DetectionSpec::default_range_table() {
  // Measured tracking/cutoff distances per pattern size (cm -> meters).
  return {
      {10, {2.1, 4.8}},
      {20, {4.25, 8.35}},
      {30, {6.3, 11.5}},
      {40, {8.5, 14.9}},
  };
}

const RangeEntry& DetectionSpec::entry_for_size(double size_m) const {
  const int cm = static_cast<int>(std::lround(size_m * 100.0));
  auto it = ranges_by_size_cm.find(cm);
  if (it == ranges_by_size_cm.end())
    fail(Errc::config, "no range entry for marker size " + std::to_string(cm) + " cm");
  return it->second;
}

void DetectionSpec::validate() const {
  for (const auto& [size, e] : ranges_by_size_cm) {
    if (!(e.tracking_m > 0) || !(e.cutoff_m > e.tracking_m))
      fail(Errc::config,
           "range table for size " + std::to_string(size) + " must have 0 < tracking < cutoff");
  }
  if (persistence < 0 || persistence > 1) fail(Errc::config, "persistence must be in [0,1]");
  if (camera_hfov <= 0 || face_half_angle <= 0) fail(Errc::config, "fov angles must be positive");
}

std::vector<Detection> simulate_marker_detection(const world::WorldModel& w,
                                                 const geo::Pose2D& robot_pose,
                                                 const geo::TurretAngles& turret,
                                                 const DetectionSpec& spec, Rng& rng,
                                                 std::optional<int> tracked_id) {
  spec.validate();
  std::vector<geo::Marker> markers = w.markers;
  std::sort(markers.begin(), markers.end(),
            [](const geo::Marker& a, const geo::Marker& b) { return a.id < b.id; });

  std::vector<Detection> out;
  out.reserve(markers.size());
  for (const geo::Marker& m : markers) {
    Detection det;
    det.marker_id = m.id;
    const double dx = m.pose.x - robot_pose.x;
    const double dy = m.pose.y - robot_pose.y;
    const double dist = std::hypot(dx, dy);
    const RangeEntry& range = spec.entry_for_size(m.size_m);

    // Best face: smallest off-normal angle; ties to the lowest index.
    const double dir_mc = std::atan2(-dy, -dx);  // marker -> camera
    int best_face = 0;
    double best_off = kInf;
    for (int f = 0; f < m.faces; ++f) {
      const double off = std::abs(geo::normalize_angle(dir_mc - geo::face_orientation(m, f)));
      if (off < best_off - 1e-12) {
        best_off = off;
        best_face = f;
      }
    }
    det.face = best_face;

    const bool face_ok = best_off <= spec.face_half_angle + 1e-12;
    const double bearing_rel = geo::normalize_angle(std::atan2(dy, dx) - robot_pose.theta);
    const bool fov_ok =
        std::abs(geo::normalize_angle(bearing_rel - turret.pan)) <= spec.camera_hfov / 2.0 + 1e-12;
    const bool los_ok =
        dist > 1e-9 && world::clear_line(w, robot_pose.x, robot_pose.y, m.pose.x, m.pose.y);

    if (face_ok && fov_ok && los_ok && dist <= range.cutoff_m) {
      bool tracked = dist <= range.tracking_m;
      if (tracked) {
        // Tracked continuity draw; only binds for the locked-on marker.
        const double u = rng.uniform();
        if (tracked_id && *tracked_id == m.id && u >= spec.persistence) tracked = false;
      }
      if (tracked) {
        det.state = DetectionState::TrackedWithPose;
        geo::Pose2D face_pose = m.pose;
        face_pose.theta = geo::face_orientation(m, best_face);
        geo::ObservationSample s =
            geo::simulate_observation(robot_pose, face_pose, spec.height_diff_m);
        // The reported measurement is expressed against the actual turret
        // state: off-axis targets show up as a lateral offset, and the yaw is
        // synthesized so that inversion with this pan reproduces the heading.
        const double delta = geo::normalize_angle(bearing_rel - turret.pan);
        geo::MarkerObservation obs = s.obs;
        obs.r_y = geo::normalize_angle(robot_pose.theta - turret.pan - face_pose.theta - geo::kPi);
        obs.t_z = dist / std::cos(turret.tilt);
        obs.t_x = obs.t_z * std::tan(delta);
        if (spec.noise_tz_m > 0)
          obs.t_z += rng.uniform(-spec.noise_tz_m, spec.noise_tz_m) / std::cos(turret.tilt);
        if (spec.noise_yaw_rad > 0)
          obs.r_y = geo::normalize_angle(
              obs.r_y + rng.uniform(-spec.noise_yaw_rad, spec.noise_yaw_rad));
        det.obs = obs;
      } else {
        det.state = DetectionState::DetectedOnly;
      }
    } else {
      det.state = DetectionState::NotVisible;
    }
    out.push_back(det);
  }
  return out;
}

RawScan simulate_scan(const world::WorldModel& w, const geo::Pose2D& robot_pose,
                      const LaserSpec& spec, Rng& rng) {
  spec.validate();
  if (!w.free_at(robot_pose.x, robot_pose.y))
    fail(Errc::invalid_pose, "scan pose lies inside an obstacle or out of bounds");

  RawScan scan;
  scan.fov = spec.fov;
  scan.ranges.resize(static_cast<std::size_t>(spec.beam_count));
  for (int i = 0; i < spec.beam_count; ++i) {
    const double bearing =
        robot_pose.theta - spec.fov / 2.0 + spec.fov * i / (spec.beam_count - 1);
    double r = world::cast_ray(w, robot_pose.x, robot_pose.y, bearing, spec.max_range);
    // Draws happen for every beam so the stream layout is input-independent.
    const double g = rng.gaussian();
    const double u = rng.uniform();
    if (std::isfinite(r) && spec.noise_sigma > 0) r += spec.noise_sigma * g;
    if (u < spec.nan_rate)
      r = kNaN;
    else if (u < spec.nan_rate + spec.inf_rate)
      r = kInf;
    scan.ranges[static_cast<std::size_t>(i)] = r;
  }
  return scan;
}

RawScan simulate_scan(const world::WorldModel& w, const geo::Pose2D& robot_pose,
                      const LaserSpec& spec, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  return simulate_scan(w, robot_pose, spec, rng);
}

double pid_step(PidController& ctrl, double error, double dt) {
  if (!std::isfinite(error)) fail(Errc::invalid_pose, "non-finite PID error");
  if (!(dt > 0)) fail(Errc::config, "PID dt must be positive");
  ctrl.integral += error * dt;
  const double deriv = ctrl.has_prev ? (error - ctrl.prev_error) / dt : 0.0;
  ctrl.prev_error = error;
  ctrl.has_prev = true;
  return ctrl.kp * error + ctrl.ki * ctrl.integral + ctrl.kd * deriv;
}

namespace {

constexpr double kPanMinDeg = 10.0;
constexpr double kPanMaxDeg = 350.0;
constexpr double kTiltMinDeg = -70.0;
constexpr double kTiltMaxDeg = 90.0;

double wrap_deg_0_360(double d) {
  double r = std::fmod(d, 360.0);
  if (r < 0) r += 360.0;
  return r;
}

}  // namespace

TurretServo::TurretServo() = default;

void TurretServo::command(const geo::TurretAngles& target) {
  double tilt_deg = geo::rad2deg(target.tilt);
  tilt_deg = std::clamp(tilt_deg, kTiltMinDeg, kTiltMaxDeg);
  tilt_target_deg_ = tilt_deg;

  // Robot-relative pan -> servo coordinates (forward = 180 deg).
  double pan_deg = wrap_deg_0_360(geo::rad2deg(target.pan) + 180.0);
  if (pan_deg < kPanMinDeg || pan_deg > kPanMaxDeg) {
    // Dead cone: snap to the nearer limit, ties toward the lower one.
    const double to_min = pan_deg < kPanMinDeg ? kPanMinDeg - pan_deg : 360.0 - pan_deg + kPanMinDeg;
    const double to_max = pan_deg > kPanMaxDeg ? pan_deg - kPanMaxDeg : pan_deg + 360.0 - kPanMaxDeg;
    pan_deg = to_min <= to_max ? kPanMinDeg : kPanMaxDeg;
  }
  pan_target_deg_ = pan_deg;
}

void TurretServo::step(double dt) {
  // The servo moves in its own coordinate space; no shortest-path wrap, the
  // dead cone is physically impassable.
  const double pan_err = geo::deg2rad(pan_target_deg_ - pan_deg_);
  const double tilt_err = geo::deg2rad(tilt_target_deg_ - tilt_deg_);
  pan_deg_ += geo::rad2deg(pid_step(pan_pid_, pan_err, dt));
  tilt_deg_ += geo::rad2deg(pid_step(tilt_pid_, tilt_err, dt));
  pan_deg_ = std::clamp(pan_deg_, kPanMinDeg, kPanMaxDeg);
  tilt_deg_ = std::clamp(tilt_deg_, kTiltMinDeg, kTiltMaxDeg);
}

geo::TurretAngles TurretServo::current() const {
  return {geo::normalize_angle(geo::deg2rad(pan_deg_ - 180.0)), geo::deg2rad(tilt_deg_)};
}

geo::TurretAngles TurretServo::target() const {
  return {geo::normalize_angle(geo::deg2rad(pan_target_deg_ - 180.0)),
          geo::deg2rad(tilt_target_deg_)};
}

bool TurretServo::settled(double tol_rad) const {
  return std::abs(geo::deg2rad(pan_target_deg_ - pan_deg_)) <= tol_rad &&
         std::abs(geo::deg2rad(tilt_target_deg_ - tilt_deg_)) <= tol_rad;
}

int TurretServo::pan_units(double servo_deg) {
  return static_cast<int>(std::lround(100.0 + (servo_deg - kPanMinDeg) *
                                                  (3980.0 - 100.0) / (kPanMaxDeg - kPanMinDeg)));
}

int TurretServo::tilt_units(double servo_deg) {
  return static_cast<int>(std::lround(1248.0 + (servo_deg - kTiltMinDeg) *
                                                   (3072.0 - 1248.0) /
                                                   (kTiltMaxDeg - kTiltMinDeg)));
}

void turret_step(TurretServo& servo, double dt) { servo.step(dt); }

StepResult robot_step(const world::WorldModel& w, const RobotState& state, double v_cmd,
                      double w_cmd, double dt, const MotionLimits& limits) {
  if (!(dt > 0)) fail(Errc::config, "robot_step dt must be positive");
  const double v = std::clamp(v_cmd, -limits.v_max, limits.v_max);
  const double om = std::clamp(w_cmd, -limits.w_max, limits.w_max);

  geo::Pose2D p = state.pose;
  if (std::abs(om) < 1e-12) {
    p.x += v * std::cos(p.theta) * dt;
    p.y += v * std::sin(p.theta) * dt;
  } else {
    const double radius = v / om;
    p.x += radius * (std::sin(p.theta + om * dt) - std::sin(p.theta));
    p.y -= radius * (std::cos(p.theta + om * dt) - std::cos(p.theta));
  }
  p.theta = geo::normalize_angle(p.theta + om * dt);

  if (!w.free_at(p.x, p.y)) return {RobotState{state.pose, 0.0, 0.0}, true};
  return {RobotState{p, v, om}, false};
}

}  // namespace marknav::sim
