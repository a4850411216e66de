#include "marknav/navigation.hpp"

#include <algorithm>
#include <cmath>

namespace marknav::nav {

geo::Pose2D TrackerState::push_fix(const geo::Pose2D& raw) {
  if (!std::isfinite(raw.x) || !std::isfinite(raw.y) || !std::isfinite(raw.theta))
    fail(Errc::invalid_pose, "non-finite localization fix");
  fixes_.push_back(raw);
  while (fixes_.size() > window_) fixes_.pop_front();
  double sx = 0, sy = 0, ssin = 0, scos = 0;
  for (const geo::Pose2D& f : fixes_) {
    sx += f.x;
    sy += f.y;
    ssin += std::sin(f.theta);
    scos += std::cos(f.theta);
  }
  const double n = static_cast<double>(fixes_.size());
  geo::Pose2D out{sx / n, sy / n, raw.theta};
  // Circular mean; an (unlikely) antipodal cancellation keeps the newest.
  if (std::hypot(ssin, scos) > 1e-12) out.theta = std::atan2(ssin, scos);
  out.theta = geo::normalize_angle(out.theta);
  last_smoothed_ = out;
  return out;
}

int nearest_marker(const geo::Pose2D& pose, const geo::MarkerDatabase& db) {
  if (db.empty()) fail(Errc::degenerate_input, "marker database is empty");
  int best_id = 0;
  double best_d = std::numeric_limits<double>::infinity();
  bool first = true;
  for (const geo::Marker& m : db.all()) {
    const double d = std::hypot(m.pose.x - pose.x, m.pose.y - pose.y);
    if (first || d < best_d || (d == best_d && m.id < best_id)) {
      best_d = d;
      best_id = m.id;
      first = false;
    }
  }
  return best_id;
}

int switch_decision(TrackerState& state, const geo::Pose2D& pose, const geo::MarkerDatabase& db) {
  const int nearest = nearest_marker(pose, db);
  if (!state.tracked_id()) {
    state.set_tracked(nearest);
    return nearest;
  }
  const int current = *state.tracked_id();
  if (nearest == current) return current;
  const geo::Marker& cur = db.get(current);
  const geo::Marker& riv = db.get(nearest);
  const double d_cur = std::hypot(cur.pose.x - pose.x, cur.pose.y - pose.y);
  const double d_riv = std::hypot(riv.pose.x - pose.x, riv.pose.y - pose.y);
  if (d_cur - d_riv >= state.hysteresis()) {
    state.set_tracked(nearest);
    return nearest;
  }
  return current;
}

double pan_to_marker(const geo::Pose2D& pose, const geo::Pose2D& marker) {
  const double dx = marker.x - pose.x;
  const double dy = marker.y - pose.y;
  if (std::hypot(dx, dy) < 1e-12)
    fail(Errc::invalid_pose, "marker coincides with the robot position");
  return geo::normalize_angle(std::atan2(dy, dx) - pose.theta);
}

WaypointManeuver maneuver(const geo::Pose2D& s, const geo::Pose2D& d) {
  WaypointManeuver m;
  const double dx = d.x - s.x;
  const double dy = d.y - s.y;
  m.delta_trans = std::hypot(dx, dy);
  if (m.delta_trans > 0.0) m.delta_theta1 = geo::normalize_angle(std::atan2(dy, dx) - s.theta);
  m.delta_theta2 = geo::normalize_angle(d.theta - s.theta - m.delta_theta1);
  return m;
}

namespace {

struct PathPoint {
  double x, y;
  std::size_t seg;   // segment index the point lies on
  double along;      // arc length from the segment start
};

PathPoint closest_path_point(const geo::Pose2D& pose, const std::vector<geo::Pose2D>& wp) {
  PathPoint best{wp[0].x, wp[0].y, 0, 0.0};
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < wp.size(); ++i) {
    const double ax = wp[i].x, ay = wp[i].y;
    const double bx = wp[i + 1].x, by = wp[i + 1].y;
    const double vx = bx - ax, vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = 0.0;
    if (len2 > 0) t = std::clamp(((pose.x - ax) * vx + (pose.y - ay) * vy) / len2, 0.0, 1.0);
    const double px = ax + t * vx, py = ay + t * vy;
    const double d2 = (pose.x - px) * (pose.x - px) + (pose.y - py) * (pose.y - py);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = {px, py, i, t * std::sqrt(len2)};
    }
  }
  if (wp.size() == 1) best = {wp[0].x, wp[0].y, 0, 0.0};
  return best;
}

}  // namespace

PursuitCommand pure_pursuit_step(const geo::Pose2D& pose,
                                 const std::vector<geo::Pose2D>& waypoints,
                                 const PurePursuitConfig& cfg) {
  if (waypoints.empty()) fail(Errc::degenerate_input, "pure pursuit needs a non-empty plan");
  if (cfg.lookahead_m <= 0) fail(Errc::config, "lookahead must be positive");

  const geo::Pose2D& goal_wp = waypoints.back();
  if (std::hypot(goal_wp.x - pose.x, goal_wp.y - pose.y) <= cfg.goal_tolerance_m)
    return {0.0, 0.0, true};

  // Goal point: lookahead arc distance along the path from the closest point.
  const PathPoint cp = closest_path_point(pose, waypoints);
  double remaining = cfg.lookahead_m;
  double gx = cp.x, gy = cp.y;
  std::size_t seg = cp.seg;
  double along = cp.along;
  while (true) {
    if (seg + 1 >= waypoints.size()) break;  // single-point path
    const double ax = waypoints[seg].x, ay = waypoints[seg].y;
    const double bx = waypoints[seg + 1].x, by = waypoints[seg + 1].y;
    const double seg_len = std::hypot(bx - ax, by - ay);
    const double left = seg_len - along;
    if (remaining <= left || seg + 2 >= waypoints.size()) {
      const double use = std::min(remaining, left);
      const double t = seg_len > 0 ? (along + use) / seg_len : 0.0;
      gx = ax + t * (bx - ax);
      gy = ay + t * (by - ay);
      break;
    }
    remaining -= left;
    ++seg;
    along = 0.0;
  }

  // Transform the goal into the robot frame; curvature from its lateral
  // offset.
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  const double rx = gx - pose.x, ry = gy - pose.y;
  const double y_goal = -s * rx + c * ry;
  const double kappa = 2.0 * y_goal / (cfg.lookahead_m * cfg.lookahead_m);

  PursuitCommand cmd;
  cmd.v = cfg.v_max;
  cmd.w = std::clamp(cmd.v * kappa, -cfg.w_max, cfg.w_max);
  return cmd;
}

}  // namespace marknav::nav
