#include "marknav/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace marknav::geo {

namespace {

bool all_finite(const MarkerObservation& o) {
  return std::isfinite(o.t_x) && std::isfinite(o.t_y) && std::isfinite(o.t_z) &&
         std::isfinite(o.r_x) && std::isfinite(o.r_y) && std::isfinite(o.r_z);
}

void check_tilt(double tilt) {
  if (!std::isfinite(tilt) || tilt < kTiltMin - 1e-12 || tilt > kTiltMax + 1e-12)
    fail(Errc::invalid_pose, "tilt angle outside servo limits");
}

}  // namespace

double Transform2D::orthonormality_error() const {
  double err = 0.0;
  // R^T R vs I over the 2x2 rotation block.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double v = 0;
      for (int k = 0; k < 2; ++k) v += at(k, i) * at(k, j);
      err = std::max(err, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  const double det = at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
  return std::max(err, std::abs(det - 1.0));
}

Transform3D::Transform3D() : m_{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1} {}

Transform3D Transform3D::translation(double x, double y, double z) {
  Transform3D t;
  t.at(0, 3) = x;
  t.at(1, 3) = y;
  t.at(2, 3) = z;
  return t;
}

Transform3D Transform3D::operator*(const Transform3D& o) const {
  Transform3D out;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double v = 0;
      for (int k = 0; k < 4; ++k) v += at(r, k) * o.at(k, c);
      out.at(r, c) = v;
    }
  return out;
}

Transform3D Transform3D::inverse() const {
  Transform3D out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.at(r, c) = at(c, r);
  for (int r = 0; r < 3; ++r) {
    double v = 0;
    for (int k = 0; k < 3; ++k) v += at(k, r) * at(k, 3);
    out.at(r, 3) = -v;
  }
  return out;
}

double Transform3D::orthonormality_error() const {
  double err = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0;
      for (int k = 0; k < 3; ++k) v += at(k, i) * at(k, j);
      err = std::max(err, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  const double det =
      at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
      at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
      at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
  return std::max(err, std::abs(det - 1.0));
}

MarkerDatabase::MarkerDatabase(std::vector<Marker> markers) {
  for (const Marker& m : markers) add(m);
}

void MarkerDatabase::add(const Marker& m) {
  if (by_id_.count(m.id)) fail(Errc::config, "duplicate marker id " + std::to_string(m.id));
  if (m.faces != 1 && m.faces != 2 && m.faces != 4)
    fail(Errc::config, "marker faces must be 1, 2 or 4");
  by_id_[m.id] = markers_.size();
  markers_.push_back(m);
}

const Marker& MarkerDatabase::get(int id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) fail(Errc::unknown_marker, "marker id " + std::to_string(id) + " not in database");
  return markers_[it->second];
}

PolarFix project_to_plane(const MarkerObservation& obs, const TurretAngles& turret) {
  if (!all_finite(obs) || !std::isfinite(turret.pan))
    fail(Errc::invalid_pose, "non-finite observation");
  if (obs.t_z <= 0.0) fail(Errc::invalid_pose, "marker must be in front of the camera (t_z > 0)");
  check_tilt(turret.tilt);
  return {obs.t_z * std::cos(turret.tilt), turret.pan};
}

Pose2D robot_pose_from_marker(const MarkerObservation& obs, const TurretAngles& turret,
                              const Pose2D& face_pose) {
  const PolarFix fix = project_to_plane(obs, turret);
  const double heading = normalize_angle(turret.pan + obs.r_y + face_pose.theta + kPi);
  const double dir = heading + turret.pan + kPi;  // marker -> robot, world frame
  return {face_pose.x + fix.r * std::cos(dir), face_pose.y + fix.r * std::sin(dir), heading};
}

Pose2D robot_pose_from_marker(const MarkerObservation& obs, const TurretAngles& turret,
                              const MarkerDatabase& db, int id, int face) {
  const Marker& m = db.get(id);
  if (face < 0 || face >= m.faces) fail(Errc::unknown_marker, "face index out of range");
  Pose2D fp = m.pose;
  fp.theta = face_orientation(m, face);
  return robot_pose_from_marker(obs, turret, fp);
}

ObservationSample simulate_observation(const Pose2D& p, const Pose2D& face_pose,
                                       double height_diff) {
  const double dx = face_pose.x - p.x;
  const double dy = face_pose.y - p.y;
  const double d = std::hypot(dx, dy);
  if (d < 1e-12) fail(Errc::invalid_pose, "camera coincides with marker position");
  const double bearing = std::atan2(dy, dx);
  const double pan = normalize_angle(bearing - p.theta);
  const double tilt = std::atan2(height_diff, d);
  ObservationSample s;
  s.turret = {pan, tilt};
  s.obs.t_z = d / std::cos(tilt);
  s.obs.r_y = normalize_angle(p.theta - pan - face_pose.theta - kPi);
  return s;
}

Transform3D laser_to_turret(double offset_y) {
  if (!std::isfinite(offset_y)) fail(Errc::invalid_pose, "non-finite laser offset");
  return Transform3D::translation(0.0, -offset_y, 0.0);
}

Transform3D camera_to_turret(const TurretAngles& turret) {
  if (!std::isfinite(turret.pan)) fail(Errc::invalid_pose, "non-finite pan");
  check_tilt(turret.tilt);
  const double cp = std::cos(turret.pan), sp = std::sin(turret.pan);
  const double ct = std::cos(turret.tilt), st = std::sin(turret.tilt);
  // Rz(pan) * Rx(tilt)
  Transform3D t;
  t.at(0, 0) = cp;
  t.at(0, 1) = -sp * ct;
  t.at(0, 2) = sp * st;
  t.at(1, 0) = sp;
  t.at(1, 1) = cp * ct;
  t.at(1, 2) = -cp * st;
  t.at(2, 0) = 0.0;
  t.at(2, 1) = st;
  t.at(2, 2) = ct;
  return t;
}

Transform2D robot_to_marker_transform(const Pose2D& p) { return Transform2D::from_pose(p); }

Transform2D chain_marker_transform(const Pose2D& pose_wrt_prev,
                                   const std::optional<MarkerObservation>& new_obs,
                                   const TurretAngles& turret) {
  if (!new_obs) fail(Errc::no_fix, "no observation of the new marker");
  const PolarFix fix = project_to_plane(*new_obs, turret);
  // New face pose in the robot frame. The face orientation follows from the
  // same observation model robot_pose_from_marker inverts:
  //   theta_face(world) = heading - pan - r_y - pi, so relative to the robot
  //   it is -(pan + r_y + pi).
  Pose2D face_in_robot{fix.r * std::cos(turret.pan), fix.r * std::sin(turret.pan),
                       normalize_angle(-(turret.pan + new_obs->r_y + kPi))};
  return robot_to_marker_transform(pose_wrt_prev) * Transform2D::from_pose(face_in_robot);
}

}  // namespace marknav::geo
