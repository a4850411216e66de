#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "marknav/geometry.hpp"

namespace marknav::nav {

// Moving-average localization filter plus the marker the tracker is locked
// onto. The hysteresis threshold is the margin by which a rival marker must
// be closer before the tracker abandons the current one.
class TrackerState {
 public:
  explicit TrackerState(std::size_t window = 5, double hysteresis_m = 0.20)
      : window_(window), hysteresis_m_(hysteresis_m) {
    if (window_ == 0) fail(Errc::config, "smoothing window must be >= 1");
  }

  std::optional<int> tracked_id() const { return tracked_id_; }
  void set_tracked(int id) { tracked_id_ = id; }
  double hysteresis() const { return hysteresis_m_; }
  std::size_t window() const { return window_; }
  const std::optional<geo::Pose2D>& last_smoothed() const { return last_smoothed_; }
  void reset_filter() { fixes_.clear(); }

  // Slide the window and return the smoothed pose (arithmetic mean of x/y,
  // circular mean of theta).
  geo::Pose2D push_fix(const geo::Pose2D& raw);

 private:
  std::size_t window_;
  double hysteresis_m_;
  std::optional<int> tracked_id_;
  std::deque<geo::Pose2D> fixes_;
  std::optional<geo::Pose2D> last_smoothed_;
};

// Nearest database marker by Euclidean distance; ties to the lowest id.
// Throws degenerate_input on an empty database.
int nearest_marker(const geo::Pose2D& pose, const geo::MarkerDatabase& db);

// Hysteresis rule: switch to the nearest marker only when it is at least the
// threshold closer than the currently tracked one. Returns the (possibly
// unchanged) tracked id; when no marker is tracked yet the nearest is
// adopted.
int switch_decision(TrackerState& state, const geo::Pose2D& pose, const geo::MarkerDatabase& db);

// Pan angle (robot-base-relative bearing) that points the camera at `marker`
// from `pose`. Throws invalid_pose when the positions coincide.
double pan_to_marker(const geo::Pose2D& pose, const geo::Pose2D& marker);

// Free-function face of TrackerState::push_fix.
inline geo::Pose2D smooth_fix(TrackerState& state, const geo::Pose2D& raw) {
  return state.push_fix(raw);
}

// Waypoint-to-waypoint primitive: rotate, translate, rotate.
struct WaypointManeuver {
  double delta_theta1 = 0.0;
  double delta_trans = 0.0;
  double delta_theta2 = 0.0;
};

// Decompose the move S -> D. Applying rotate(delta_theta1),
// translate(delta_trans), rotate(delta_theta2) to S reproduces D exactly;
// S == D yields the all-zero maneuver (zero-translation moves skip the
// alignment rotation).
WaypointManeuver maneuver(const geo::Pose2D& s, const geo::Pose2D& d);

struct PurePursuitConfig {
  double lookahead_m = 1.0;
  double v_max = 0.3;
  double w_max = 1.5;
  double goal_tolerance_m = 0.05;
};

struct PursuitCommand {
  double v = 0.0;
  double w = 0.0;
  bool done = false;
};

// One pure-pursuit step along a waypoint polyline: find the closest path
// point, walk the lookahead arc distance along the path (path end if
// shorter), transform the goal into the robot frame and steer with curvature
// kappa = 2 y_goal / L^2. Inside the goal tolerance of the final waypoint the
// command is zero with done set. Throws degenerate_input on an empty plan.
PursuitCommand pure_pursuit_step(const geo::Pose2D& pose,
                                 const std::vector<geo::Pose2D>& waypoints,
                                 const PurePursuitConfig& cfg);

}  // namespace marknav::nav
