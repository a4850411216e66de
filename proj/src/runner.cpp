#include "marknav/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "marknav/io.hpp"

namespace marknav::run {

LocalizationLoop::LocalizationLoop(const world::WorldModel& w, const scenario::Scenario& sc,
                                   Rng& rng, const geo::Pose2D& initial_estimate)
    : world_(w),
      sc_(sc),
      rng_(rng),
      db_(w.markers),
      tracker_(sc.controller.smoothing_window, sc.controller.hysteresis_m),
      estimate_(initial_estimate),
      dt_(1.0 / sc.controller.rate_hz) {
  if (db_.empty()) fail(Errc::config, "world has no markers to localize from");
  servo_.pan_pid().kp = sc.controller.kp;
  servo_.pan_pid().ki = sc.controller.ki;
  servo_.pan_pid().kd = sc.controller.kd;
  servo_.tilt_pid().kp = sc.controller.kp;
  servo_.tilt_pid().ki = sc.controller.ki;
  servo_.tilt_pid().kd = sc.controller.kd;
  const int first = nav::nearest_marker(estimate_, db_);
  tracker_.set_tracked(first);
  const geo::Marker& m = db_.get(first);
  const double dist = std::hypot(m.pose.x - estimate_.x, m.pose.y - estimate_.y);
  servo_.command({nav::pan_to_marker(estimate_, m.pose),
                  std::atan2(sc.detection.height_diff_m, std::max(dist, 1e-6))});
  // Let the turret settle on the first marker before t = 0.
  for (int i = 0; i < 200 && !servo_.settled(1e-9); ++i) servo_.step(dt_);
}

LocalizationLoop::TickResult LocalizationLoop::tick(double t, const geo::Pose2D& truth) {
  servo_.step(dt_);

  const auto detections = sim::simulate_marker_detection(world_, truth, servo_.current(),
                                                         sc_.detection, rng_,
                                                         tracker_.tracked_id());
  TickResult out;
  const int tracked = *tracker_.tracked_id();
  out.tracked_marker = tracked;
  for (const sim::Detection& det : detections) {
    if (det.marker_id != tracked) continue;
    if (det.state == sim::DetectionState::TrackedWithPose && det.obs) {
      const geo::Pose2D raw =
          geo::robot_pose_from_marker(*det.obs, servo_.current(), db_, tracked, det.face);
      out.raw = raw;
      estimate_ = tracker_.push_fix(raw);
      last_fix_t_ = t;
    }
    break;
  }
  if (!out.raw && t - last_fix_t_ > sc_.controller.dead_reckon_s)
    fail(Errc::lost_localization,
         "no pose fix for " + io::fmt_double(t - last_fix_t_) + " s (dead-reckoning horizon " +
             io::fmt_double(sc_.controller.dead_reckon_s) + " s)");

  // Marker transition with hysteresis, then keep the turret on the target.
  const int now_tracked = nav::switch_decision(tracker_, estimate_, db_);
  const geo::Marker& m = db_.get(now_tracked);
  const double dist = std::hypot(m.pose.x - estimate_.x, m.pose.y - estimate_.y);
  if (dist > 1e-9)
    servo_.command({nav::pan_to_marker(estimate_, m.pose),
                    std::atan2(sc_.detection.height_diff_m, dist)});
  out.estimate = estimate_;
  out.tracked_marker = now_tracked;
  return out;
}

void check_marker_spacing(const world::WorldModel& w, const sim::DetectionSpec& spec) {
  const std::size_t n = w.markers.size();
  if (n <= 1) return;
  // Union-find over the "within tracking range" graph.
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  const auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::hypot(w.markers[i].pose.x - w.markers[j].pose.x,
                                  w.markers[i].pose.y - w.markers[j].pose.y);
      const double reach = std::min(spec.entry_for_size(w.markers[i].size_m).tracking_m,
                                    spec.entry_for_size(w.markers[j].size_m).tracking_m);
      if (d <= reach) parent[find(i)] = find(j);
    }
  const std::size_t root = find(0);
  for (std::size_t i = 1; i < n; ++i)
    if (find(i) != root)
      fail(Errc::config, "marker spacing exceeds the tracking range: marker " +
                             std::to_string(w.markers[i].id) +
                             " is not chain-reachable from marker " +
                             std::to_string(w.markers[0].id));
}

namespace {

// Segment-wise waypoint executor: align in place toward the segment, pure
// pursuit along it, then a final in-place alignment to the goal heading.
class WaypointExecutor {
 public:
  WaypointExecutor(std::vector<geo::Pose2D> waypoints, const scenario::ControllerParams& ctrl)
      : wp_(std::move(waypoints)), ctrl_(ctrl) {
    if (wp_.size() < 2) phase_ = Phase::FinalAlign;
  }

  struct Cmd {
    double v = 0.0;
    double w = 0.0;
    bool done = false;
    bool translating = false;  // cross-track applies only while tracking
    std::size_t segment = 0;
  };

  Cmd step(const geo::Pose2D& est) {
    Cmd cmd;
    cmd.segment = seg_;
    switch (phase_) {
      case Phase::Align: {
        const geo::Pose2D& tgt = wp_[seg_ + 1];
        const double want = std::atan2(tgt.y - est.y, tgt.x - est.x);
        const double err = geo::normalize_angle(want - est.theta);
        if (std::abs(err) <= ctrl_.align_tolerance_rad) {
          phase_ = Phase::Track;
          return step(est);
        }
        cmd.w = std::clamp(2.0 * err, -ctrl_.pursuit.w_max, ctrl_.pursuit.w_max);
        return cmd;
      }
      case Phase::Track: {
        const std::vector<geo::Pose2D> segment{wp_[seg_], wp_[seg_ + 1]};
        const nav::PursuitCommand pc = nav::pure_pursuit_step(est, segment, ctrl_.pursuit);
        if (pc.done) {
          if (seg_ + 2 < wp_.size()) {
            ++seg_;
            phase_ = Phase::Align;
          } else {
            phase_ = Phase::FinalAlign;
          }
          return step(est);
        }
        cmd.v = pc.v;
        cmd.w = pc.w;
        cmd.translating = true;
        return cmd;
      }
      case Phase::FinalAlign: {
        const double err = geo::normalize_angle(wp_.back().theta - est.theta);
        if (std::abs(err) <= ctrl_.align_tolerance_rad) {
          phase_ = Phase::Done;
          cmd.done = true;
          return cmd;
        }
        cmd.w = std::clamp(2.0 * err, -ctrl_.pursuit.w_max, ctrl_.pursuit.w_max);
        return cmd;
      }
      case Phase::Done:
        cmd.done = true;
        return cmd;
    }
    return cmd;
  }

  const std::vector<geo::Pose2D>& waypoints() const { return wp_; }

 private:
  enum class Phase { Align, Track, FinalAlign, Done };
  std::vector<geo::Pose2D> wp_;
  scenario::ControllerParams ctrl_;
  Phase phase_ = Phase::Align;
  std::size_t seg_ = 0;
};

double point_segment_distance(double px, double py, const geo::Pose2D& a, const geo::Pose2D& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0) t = std::clamp(((px - a.x) * vx + (py - a.y) * vy) / len2, 0.0, 1.0);
  return std::hypot(px - (a.x + t * vx), py - (a.y + t * vy));
}

}  // namespace

MappingRunResult run_mapping(const world::WorldModel& w, const scenario::Scenario& sc) {
  if (sc.waypoints.size() < 2)
    fail(Errc::config, "mapping scenario needs at least two waypoints");
  w.validate();
  check_marker_spacing(w, sc.detection);

  Rng rng(sc.seed);
  const double dt = 1.0 / sc.controller.rate_hz;
  const geo::Pose2D start = sc.waypoints.front();
  if (!w.free_at(start.x, start.y)) fail(Errc::invalid_pose, "start pose is not in free space");

  MappingRunResult res;
  res.mapper = map::GlobalMapper(grid::OccupancyGrid(), map::SensorModel(), false);
  LocalizationLoop loop(w, sc, rng, start);
  WaypointExecutor exec(sc.waypoints, sc.controller);
  sim::RobotState truth{start, 0.0, 0.0};
  const sim::MotionLimits limits{sc.controller.pursuit.v_max, sc.controller.pursuit.w_max};

  double t = 0.0;
  double next_scan_t = 0.0;
  const double max_t = 3600.0;
  while (t < max_t) {
    const LocalizationLoop::TickResult fix = loop.tick(t, truth.pose);
    if (fix.raw)
      res.log.push_back({t, *fix.raw, LogKind::raw, fix.tracked_marker, truth.v, truth.w});
    res.log.push_back({t, fix.estimate, LogKind::smoothed, fix.tracked_marker, truth.v, truth.w});
    res.truth_log.push_back({t, truth.pose, LogKind::truth, fix.tracked_marker, truth.v, truth.w});

    // Fuse a scan when due, at the raw fix of this tick (mapping uses the
    // unsmoothed marker fix; smoothing is a navigation-time feature).
    if (t >= next_scan_t && fix.raw) {
      const sim::RawScan raw = sim::simulate_scan(w, truth.pose, sc.laser, rng);
      const map::CleanScan clean = map::preprocess_scan(raw, sc.laser.max_range);
      const grid::OccupancyGrid local = map::raytrace_local(clean, w.resolution);
      res.mapper.fuse(local, *fix.raw);
      ++res.scans_fused;
      next_scan_t += sc.scan_period_s;
    }

    // Operator-analog drive on the true pose.
    const WaypointExecutor::Cmd cmd = exec.step(truth.pose);
    if (cmd.done) break;
    const sim::StepResult sr = sim::robot_step(w, truth, cmd.v, cmd.w, dt, limits);
    if (sr.collided) fail(Errc::collision, "mapping platform hit an obstacle");
    truth = sr.state;
    t += dt;
  }
  if (t >= max_t) fail(Errc::internal, "mapping run did not terminate");
  res.sim_time_s = t;
  return res;
}

NavigationRunResult run_navigation(const world::WorldModel& w, const scenario::Scenario& sc,
                                   const std::vector<geo::Pose2D>& waypoints) {
  if (waypoints.empty()) fail(Errc::config, "navigation needs at least one waypoint");
  w.validate();

  Rng rng(sc.seed);
  const double dt = 1.0 / sc.controller.rate_hz;
  geo::Pose2D start = sc.src.value_or(waypoints.front());
  if (!w.free_at(start.x, start.y))
    fail(Errc::invalid_endpoint, "navigation start pose is not in free space");

  // The executed plan starts at the robot's start pose.
  std::vector<geo::Pose2D> plan;
  plan.push_back(start);
  for (int lap = 0; lap < std::max(1, sc.laps); ++lap)
    for (const geo::Pose2D& p : waypoints) plan.push_back(p);

  NavigationRunResult res;
  LocalizationLoop loop(w, sc, rng, start);
  WaypointExecutor exec(plan, sc.controller);
  sim::RobotState truth{start, 0.0, 0.0};
  const sim::MotionLimits limits{sc.controller.pursuit.v_max, sc.controller.pursuit.w_max};

  double t = 0.0;
  const double max_t = 3600.0;
  while (t < max_t) {
    const LocalizationLoop::TickResult fix = loop.tick(t, truth.pose);
    if (fix.raw)
      res.log.push_back({t, *fix.raw, LogKind::raw, fix.tracked_marker, truth.v, truth.w});
    res.log.push_back({t, fix.estimate, LogKind::smoothed, fix.tracked_marker, truth.v, truth.w});
    res.truth_log.push_back({t, truth.pose, LogKind::truth, fix.tracked_marker, truth.v, truth.w});

    const WaypointExecutor::Cmd cmd = exec.step(fix.estimate);
    if (cmd.done) {
      res.reached_goal = true;
      break;
    }
    if (cmd.translating) {
      const double ct = point_segment_distance(truth.pose.x, truth.pose.y,
                                               exec.waypoints()[cmd.segment],
                                               exec.waypoints()[cmd.segment + 1]);
      res.max_cross_track_m = std::max(res.max_cross_track_m, ct);
    }
    const sim::StepResult sr = sim::robot_step(w, truth, cmd.v, cmd.w, dt, limits);
    if (sr.collided) fail(Errc::collision, "robot hit an obstacle");
    truth = sr.state;
    t += dt;
  }
  if (t >= max_t) fail(Errc::internal, "navigation run did not terminate");
  res.sim_time_s = t;
  return res;
}

PlannerArtifacts build_planner(const grid::OccupancyGrid& g, int occupied_threshold) {
  PlannerArtifacts art;
  // Planning treats unknown space as blocked.
  art.obstacles = grid::BinaryMap(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const std::int8_t v = g.at(x, y);
      art.obstacles.at(x, y) = (v < 0 || v >= occupied_threshold) ? 1 : 0;
    }
  art.clearance = plan::clearance_map(art.obstacles);
  art.skeleton = plan::voronoi_boundaries(art.clearance, art.obstacles);
  art.graph = plan::VoronoiGraph(art.skeleton, g.resolution, g.origin_x, g.origin_y);
  return art;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows,
                          const std::vector<std::string>& header_lines) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot open " + path.string() + " for writing");
  for (const std::string& h : header_lines) out << "# " << h << "\n";
  out << "t_s,x_m,y_m,theta_rad,kind,tracked_marker_id,v_mps,w_radps\n";
  for (const TrajectoryRow& r : rows) {
    const char* kind = r.kind == LogKind::raw ? "raw"
                       : r.kind == LogKind::smoothed ? "smoothed"
                                                     : "truth";
    out << io::fmt_double(r.t) << "," << io::fmt_double(r.pose.x) << ","
        << io::fmt_double(r.pose.y) << "," << io::fmt_double(r.pose.theta) << "," << kind << ","
        << r.tracked_marker << "," << io::fmt_double(r.v) << "," << io::fmt_double(r.w) << "\n";
  }
}

std::vector<eval::TimedPoint> read_trajectory_csv(const std::filesystem::path& path,
                                                  const std::string& kind_filter) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::vector<eval::TimedPoint> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    f.push_back(cur);
    if (f.size() != 8) fail(Errc::io, path.string() + ": bad trajectory row: " + line);
    if (!kind_filter.empty() && f[4] != kind_filter) continue;
    out.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2])});
  }
  return out;
}

}  // namespace marknav::run
