#pragma once

#include <optional>
#include <vector>

#include "marknav/eval.hpp"
#include "marknav/mapping.hpp"
#include "marknav/navigation.hpp"
#include "marknav/planner.hpp"
#include "marknav/scenario.hpp"
#include "marknav/sim.hpp"
#include "marknav/world.hpp"

namespace marknav::run {

enum class LogKind { raw, smoothed, truth };

struct TrajectoryRow {
  double t = 0.0;
  geo::Pose2D pose;
  LogKind kind = LogKind::truth;
  int tracked_marker = -1;
  double v = 0.0;
  double w = 0.0;
};

// Closed-loop localization: turret tracking with hysteresis transitions,
// pose fixes from the tracked marker, moving-average smoothing and a bounded
// dead-reckoning grace window. Shared by the mapping and navigation runs.
class LocalizationLoop {
 public:
  LocalizationLoop(const world::WorldModel& w, const scenario::Scenario& sc, Rng& rng,
                   const geo::Pose2D& initial_estimate);

  struct TickResult {
    std::optional<geo::Pose2D> raw;  // fresh fix this tick, if any
    geo::Pose2D estimate;            // smoothed or dead-reckoned
    int tracked_marker = -1;
  };

  // Advance one control tick at time t given the true robot pose. Throws
  // lost_localization when no pose fix arrived within the dead-reckoning
  // horizon.
  TickResult tick(double t, const geo::Pose2D& truth);

  const geo::MarkerDatabase& database() const { return db_; }

 private:
  const world::WorldModel& world_;
  const scenario::Scenario& sc_;
  Rng& rng_;
  geo::MarkerDatabase db_;
  sim::TurretServo servo_;
  nav::TrackerState tracker_;
  geo::Pose2D estimate_;
  double last_fix_t_ = 0.0;
  double dt_;
};

struct MappingRunResult {
  map::GlobalMapper mapper;
  std::vector<TrajectoryRow> log;
  std::vector<TrajectoryRow> truth_log;
  int scans_fused = 0;
  double sim_time_s = 0.0;
};

// Scripted mapping pass: the platform is driven along the scenario waypoints
// (operator analog: actuation on the true pose) while scans are fused at the
// marker-derived fixes. Validates that markers sit within tracking range of
// each other before starting.
MappingRunResult run_mapping(const world::WorldModel& w, const scenario::Scenario& sc);

struct NavigationRunResult {
  std::vector<TrajectoryRow> log;
  std::vector<TrajectoryRow> truth_log;
  double max_cross_track_m = 0.0;
  double sim_time_s = 0.0;
  bool reached_goal = false;
};

// Autonomous waypoint navigation on marker-based localization: per segment,
// align in place, pure-pursue the straight segment, then align to the final
// heading. Cross-track is measured from the true pose to the active segment.
NavigationRunResult run_navigation(const world::WorldModel& w, const scenario::Scenario& sc,
                                   const std::vector<geo::Pose2D>& waypoints);

// Validate that every marker is within tracking range of another (the
// placement rule the mapping pass relies on); throws config with a diagnostic
// naming the first oversized gap.
void check_marker_spacing(const world::WorldModel& w, const sim::DetectionSpec& spec);

// Planner pipeline over a mapped or ground-truth grid: unknown cells are
// treated as obstacles for planning.
struct PlannerArtifacts {
  grid::BinaryMap obstacles;
  plan::ClearanceMap clearance;
  grid::BinaryMap skeleton;
  plan::VoronoiGraph graph;
};
PlannerArtifacts build_planner(const grid::OccupancyGrid& g, int occupied_threshold = 50);

void write_trajectory_csv(const std::filesystem::path& path,
                          const std::vector<TrajectoryRow>& rows,
                          const std::vector<std::string>& header_lines);
std::vector<eval::TimedPoint> read_trajectory_csv(const std::filesystem::path& path,
                                                  const std::string& kind_filter);

}  // namespace marknav::run
