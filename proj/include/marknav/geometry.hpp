#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "marknav/errors.hpp"

namespace marknav::geo {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

// Normalize an angle to (-pi, pi].
inline double normalize_angle(double a) {
  double r = std::remainder(a, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

// Planar robot pose; theta is kept normalized to (-pi, pi] by every operation
// that produces one.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

// Raw 6-DOF marker measurement in the camera frame: translation in meters,
// rotation in radians. Only t_z (distance along the optical axis) and r_y
// (marker yaw about the vertical) carry information in the planar model; the
// other components are kept for fidelity to the sensor message layout.
struct MarkerObservation {
  double t_x = 0.0;
  double t_y = 0.0;
  double t_z = 0.0;  // must be > 0: marker in front of the camera
  double r_x = 0.0;
  double r_y = 0.0;
  double r_z = 0.0;
};

// Pan/tilt state in radians, robot-base-relative: pan 0 looks along the robot
// heading, positive pan is counter-clockwise. The physical servo range
// (pan 10..350 deg in servo coordinates, i.e. +-170 deg about the robot's
// forward axis; tilt -70..90 deg) is enforced by sim::TurretServo, which owns
// the servo coordinate frame; this value type carries any finite angle.
struct TurretAngles {
  double pan = 0.0;
  double tilt = 0.0;
};

inline constexpr double kTiltMin = -70.0 * kPi / 180.0;
inline constexpr double kTiltMax = 90.0 * kPi / 180.0;
inline constexpr double kPanHalfRange = 170.0 * kPi / 180.0;  // about robot forward

// Range/bearing fix of a marker in the robot base frame.
struct PolarFix {
  double r = 0.0;  // meters, >= 0
  double bearing = 0.0;
};

// 3x3 homogeneous planar transform, row-major.
class Transform2D {
 public:
  Transform2D() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

  static Transform2D identity() { return {}; }
  static Transform2D from_pose(const Pose2D& p) {
    Transform2D t;
    const double c = std::cos(p.theta), s = std::sin(p.theta);
    t.m_ = {c, -s, p.x, s, c, p.y, 0, 0, 1};
    return t;
  }

  double at(int r, int c) const { return m_[static_cast<std::size_t>(r * 3 + c)]; }
  double& at(int r, int c) { return m_[static_cast<std::size_t>(r * 3 + c)]; }

  Transform2D operator*(const Transform2D& o) const {
    Transform2D out;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        double v = 0;
        for (int k = 0; k < 3; ++k) v += at(r, k) * o.at(k, c);
        out.at(r, c) = v;
      }
    return out;
  }

  // Rigid inverse (R^T, -R^T t).
  Transform2D inverse() const {
    Transform2D out;
    out.m_ = {at(0, 0), at(1, 0), -(at(0, 0) * at(0, 2) + at(1, 0) * at(1, 2)),
              at(0, 1), at(1, 1), -(at(0, 1) * at(0, 2) + at(1, 1) * at(1, 2)),
              0,        0,        1};
    return out;
  }

  void apply(double x, double y, double& ox, double& oy) const {
    ox = at(0, 0) * x + at(0, 1) * y + at(0, 2);
    oy = at(1, 0) * x + at(1, 1) * y + at(1, 2);
  }

  double rotation() const { return std::atan2(at(1, 0), at(0, 0)); }
  double tx() const { return at(0, 2); }
  double ty() const { return at(1, 2); }

  Pose2D to_pose() const { return {tx(), ty(), normalize_angle(rotation())}; }

  // Max deviation of R^T R from identity plus |det - 1|.
  double orthonormality_error() const;

 private:
  std::array<double, 9> m_;
};

// 4x4 homogeneous spatial transform, row-major.
class Transform3D {
 public:
  Transform3D();
  static Transform3D identity() { return {}; }
  static Transform3D translation(double x, double y, double z);

  double at(int r, int c) const { return m_[static_cast<std::size_t>(r * 4 + c)]; }
  double& at(int r, int c) { return m_[static_cast<std::size_t>(r * 4 + c)]; }

  Transform3D operator*(const Transform3D& o) const;
  Transform3D inverse() const;  // rigid inverse
  double orthonormality_error() const;

 private:
  std::array<double, 16> m_;
};

// A marker installation: a cuboid (or plate) whose faces carry fiducial
// patterns. pose.theta is the orientation of face 0; a face with orientation
// theta_f has outward normal (cos theta_f, sin theta_f). Faces of one unit
// share the position and differ by 2*pi/faces.
struct Marker {
  int id = 0;
  Pose2D pose;
  int faces = 4;       // 1, 2 or 4
  double size_m = 0.2; // pattern edge length
};

inline double face_orientation(const Marker& m, int face) {
  return normalize_angle(m.pose.theta + kTwoPi * face / m.faces);
}

class MarkerDatabase {
 public:
  MarkerDatabase() = default;
  explicit MarkerDatabase(std::vector<Marker> markers);

  void add(const Marker& m);
  bool has(int id) const { return by_id_.count(id) != 0; }
  const Marker& get(int id) const;  // throws unknown_marker
  const std::vector<Marker>& all() const { return markers_; }
  bool empty() const { return markers_.empty(); }
  std::size_t size() const { return markers_.size(); }

 private:
  std::vector<Marker> markers_;
  std::map<int, std::size_t> by_id_;
};

// --- Operations -------------------------------------------------------------

// Project a camera-frame marker measurement onto the motion plane:
// r = t_z * cos(tilt), bearing = pan. Rejects non-finite inputs, t_z <= 0 and
// tilt outside the servo limits.
PolarFix project_to_plane(const MarkerObservation& obs, const TurretAngles& turret);

// Recover the robot pose from an observation of a known marker face.
// Heading: P_a = pan + r_y + theta_face + pi, normalized. Position: the robot
// lies at distance r from the marker along the world direction
// P_a + pan + pi, i.e. the rigid construction that makes
// simulate_observation/robot_pose_from_marker exact inverses.
Pose2D robot_pose_from_marker(const MarkerObservation& obs, const TurretAngles& turret,
                              const Pose2D& face_pose);

// Database variant: looks up marker `id`, face index `face`.
// Throws unknown_marker if the id is absent.
Pose2D robot_pose_from_marker(const MarkerObservation& obs, const TurretAngles& turret,
                              const MarkerDatabase& db, int id, int face);

// Synthesize the observation a tracking camera would report from robot pose
// `p` looking at marker face `face_pose`. `height_diff` is the vertical
// offset between marker center and camera (sets the tilt); the returned
// turret angles are the aimed pan/tilt consistent with the observation.
struct ObservationSample {
  MarkerObservation obs;
  TurretAngles turret;
};
ObservationSample simulate_observation(const Pose2D& p, const Pose2D& face_pose,
                                       double height_diff = 0.0);

// Static sensor-mount transform: pure translation of the laser frame along
// the turret base's negative y axis.
Transform3D laser_to_turret(double offset_y);

// Camera frame w.r.t. the turret base: Rz(pan) * Rx(tilt).
Transform3D camera_to_turret(const TurretAngles& turret);

// Planar transform of robot coordinates into the frame the pose is expressed
// in (rotation by theta, translation by (x, y)).
Transform2D robot_to_marker_transform(const Pose2D& p);

// Pose of a newly observed marker face expressed in the previous marker's
// frame. `pose_wrt_prev` is the robot pose in the previous marker's frame;
// `new_obs` the observation of the new face. Throws no_fix when the
// observation is absent.
Transform2D chain_marker_transform(const Pose2D& pose_wrt_prev,
                                   const std::optional<MarkerObservation>& new_obs,
                                   const TurretAngles& turret);

}  // namespace marknav::geo
