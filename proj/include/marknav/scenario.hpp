#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/navigation.hpp"
#include "marknav/sim.hpp"

namespace marknav::scenario {

// Control-loop parameters shared by the mapping and navigation runners.
struct ControllerParams {
  double rate_hz = 30.0;
  nav::PurePursuitConfig pursuit;
  double kp = 0.7;
  double ki = 0.0;
  double kd = 0.0;
  std::size_t smoothing_window = 5;
  double hysteresis_m = 0.20;
  double dead_reckon_s = 1.0;
  double align_tolerance_rad = 0.02;
};

// One declarative scenario: world + sensor/controller parameter blocks +
// either a scripted waypoint trajectory or a (src, dst) pair.
struct Scenario {
  std::filesystem::path world_pgm;
  std::filesystem::path markers_csv;
  sim::LaserSpec laser;
  sim::DetectionSpec detection;
  ControllerParams controller;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  std::vector<geo::Pose2D> waypoints;          // poses in meters/degrees-in-file
  std::optional<geo::Pose2D> src;
  std::optional<geo::Pose2D> dst;
  double scan_period_s = 0.2;
  int laps = 1;
  int occupied_threshold = 50;

  // Normalized key=value echo of every parameter, embedded in output files.
  std::vector<std::string> param_lines() const;
};

// Parse the flat INI-style scenario file ([section] headers, key = value,
// '#'/';' comments). Unknown keys raise config errors; file paths resolve
// relative to the scenario file.
Scenario load_scenario(const std::filesystem::path& path);

// Section/key view of the same format, reusable for other config files.
std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::filesystem::path& path);

}  // namespace marknav::scenario
