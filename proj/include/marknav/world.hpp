#pragma once

#include <filesystem>

#include "marknav/geometry.hpp"
#include "marknav/grid.hpp"

namespace marknav::world {

// Ground-truth environment for simulation: an obstacle bitmap at a fixed
// resolution plus the installed markers. Free space is everything that is not
// an obstacle; markers must sit in free space (they hang above the floor but
// their plan position must be traversable).
struct WorldModel {
  grid::BinaryMap obstacles;  // 1 = obstacle
  double resolution = 20.0;   // cells per meter
  int origin_x = 0;
  int origin_y = 0;
  std::vector<geo::Marker> markers;

  bool in_bounds(int cx, int cy) const { return obstacles.in_bounds(cx, cy); }
  bool obstacle(int cx, int cy) const { return obstacles.set(cx, cy); }
  bool free(int cx, int cy) const { return obstacles.in_bounds(cx, cy) && !obstacles.at(cx, cy); }

  int world_to_cell_x(double x) const {
    return static_cast<int>(std::floor(x * resolution)) + origin_x;
  }
  int world_to_cell_y(double y) const {
    return static_cast<int>(std::floor(y * resolution)) + origin_y;
  }
  double cell_center_x(int cx) const { return (cx - origin_x + 0.5) / resolution; }
  double cell_center_y(int cy) const { return (cy - origin_y + 0.5) / resolution; }

  bool free_at(double x, double y) const {
    return free(world_to_cell_x(x), world_to_cell_y(y));
  }

  geo::MarkerDatabase database() const { return geo::MarkerDatabase(markers); }

  // Throws config when the invariants do not hold (markers in obstacles or
  // out of bounds, empty bitmap).
  void validate() const;
};

// Directional ray cast from a world position. Returns the distance to the
// entry face of the first obstacle cell, or +inf when nothing is hit within
// max_range. Amanatides-Woo traversal on the bitmap; rays that start inside
// an obstacle return 0.
double cast_ray(const WorldModel& w, double x, double y, double angle, double max_range);

// Line of sight between two world points: no obstacle cell strictly between
// their cells.
bool clear_line(const WorldModel& w, double x0, double y0, double x1, double y1);

// World files: PGM P5 bitmap (occupancy pixel mapping, obstacles = 100) plus
// key/value sidecar and the marker CSV next to it.
void save_world(const WorldModel& w, const std::filesystem::path& pgm_path,
                const std::vector<std::string>& header_lines = {});
WorldModel load_world(const std::filesystem::path& pgm_path,
                      const std::filesystem::path& markers_csv);

// Ground-truth view of the world as an occupancy grid (obstacle -> 100,
// free -> 0); used to score mapped grids against truth.
grid::OccupancyGrid to_grid(const WorldModel& w);

}  // namespace marknav::world
