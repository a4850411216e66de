#pragma once

#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/grid.hpp"
#include "marknav/sim.hpp"

namespace marknav::map {

// A scan after preprocessing: every range finite and in (0, ceiling].
struct CleanScan {
  std::vector<double> ranges;
  double fov = geo::deg2rad(240.0);
  double ceiling = 3.5;

  double bearing(std::size_t i) const {
    return -fov / 2.0 + fov * static_cast<double>(i) /
                            static_cast<double>(ranges.size() - 1);
  }
};

// Clamp out-of-range/inf readings to the ceiling and fill NaN runs by linear
// interpolation between the nearest finite neighbours (edge runs copy the
// nearest finite value). Throws unusable_scan when no beam is finite.
CleanScan preprocess_scan(const sim::RawScan& raw, double ceiling = 3.5);

// Rasterize a clean scan in the scanner frame. The scanner sits at the grid
// center; traversed cells become 0, endpoints below the ceiling become 100
// and their 8-neighbours 50 (unless already 100); everything else stays -1.
grid::OccupancyGrid raytrace_local(const CleanScan& scan, double resolution = 20.0);

// Inverse sensor model probabilities for the odds-product update.
struct SensorModel {
  double p_hit = 0.7;   // endpoint cell
  double p_free = 0.3;  // traversed cell
  double p_near = 0.6;  // endpoint 8-neighbour ("possible obstacle")
};

// Accumulates local grids into a global occupancy grid using the recursive
// odds product with a 0.5 prior; keeps per-cell observation counts and exact
// log-odds for order-independence checks.
class GlobalMapper {
 public:
  explicit GlobalMapper(grid::OccupancyGrid initial = grid::OccupancyGrid(),
                        SensorModel model = SensorModel(), bool auto_grow = false);

  // Fuse a local grid taken at `robot_pose` (a marker-derived fix). Throws
  // invalid_pose when observations fall outside the grid and auto_grow is
  // off; otherwise the grid extends to fit.
  void fuse(const grid::OccupancyGrid& local, const geo::Pose2D& robot_pose);

  const grid::OccupancyGrid& grid() const { return grid_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }
  const std::vector<double>& log_odds() const { return log_odds_; }
  double probability_at(int x, int y) const;
  std::uint32_t count_at(int x, int y) const {
    return counts_[static_cast<std::size_t>(y) * grid_.width + x];
  }

 private:
  void update_cell(int gx, int gy, double p_meas);
  void grow_to_include(int gx, int gy);

  grid::OccupancyGrid grid_;
  std::vector<double> log_odds_;
  std::vector<std::uint32_t> counts_;
  SensorModel model_;
  bool auto_grow_;
};

// Spec-shaped free function over GlobalMapper.
inline void fuse_global(GlobalMapper& mapper, const grid::OccupancyGrid& local,
                        const geo::Pose2D& robot_pose) {
  mapper.fuse(local, robot_pose);
}

// Threshold to a binary obstacle map: cell >= threshold -> 1, anything else
// (including unknown) -> 0.
grid::BinaryMap binarize(const grid::OccupancyGrid& g, int occupied_threshold = 50);

// Known-free mask: cells observed with value in [0, threshold). Unknown cells
// are excluded.
grid::BinaryMap known_free_mask(const grid::OccupancyGrid& g, int occupied_threshold = 50);

// Zhang-Suen thinning of the set cells down to 1-px-wide strokes.
grid::BinaryMap thin(const grid::BinaryMap& m);

inline grid::BinaryMap binarize_and_thin(const grid::OccupancyGrid& g,
                                         int occupied_threshold = 50) {
  return thin(binarize(g, occupied_threshold));
}

}  // namespace marknav::map
