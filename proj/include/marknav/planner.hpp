#pragma once

#include <optional>
#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/grid.hpp"

namespace marknav::plan {

// Per-cell Euclidean distance (in cells) to the nearest obstacle cell.
struct ClearanceMap {
  int width = 0;
  int height = 0;
  std::vector<double> dist;

  double at(int x, int y) const { return dist[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return dist[static_cast<std::size_t>(y) * width + x]; }
};

// Exact EDT of the obstacle set (1 = obstacle). Throws degenerate_input when
// the map has no obstacle or no free cell.
ClearanceMap clearance_map(const grid::BinaryMap& obstacles);

// Skeleton of the free space: distance-ordered homotopic thinning anchored on
// maximal-disc cells of the clearance map, followed by a final thinning pass.
// Preserves the connectivity (and holes) of the free space.
grid::BinaryMap voronoi_boundaries(const ClearanceMap& clearance,
                                   const grid::BinaryMap& obstacles);

// 8-connected graph over skeleton cells; edge weights 1 / sqrt(2) cells.
class VoronoiGraph {
 public:
  VoronoiGraph() = default;
  VoronoiGraph(const grid::BinaryMap& skeleton, double resolution, int origin_x, int origin_y);

  bool empty() const { return nodes_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<grid::Cell>& nodes() const { return nodes_; }
  const std::vector<std::pair<int, double>>& neighbors(int node) const {
    return adj_[static_cast<std::size_t>(node)];
  }
  int node_at(grid::Cell c) const;  // -1 when not a skeleton cell

  // Nearest node to a cell by Euclidean distance; ties to the lowest (y, x).
  int snap(grid::Cell c) const;

  double resolution = 20.0;
  int origin_x = 0;
  int origin_y = 0;
  double cell_center_x(int cx) const { return (cx - origin_x + 0.5) / resolution; }
  double cell_center_y(int cy) const { return (cy - origin_y + 0.5) / resolution; }
  int world_to_cell_x(double x) const {
    return static_cast<int>(std::floor(x * resolution)) + origin_x;
  }
  int world_to_cell_y(double y) const {
    return static_cast<int>(std::floor(y * resolution)) + origin_y;
  }

 private:
  std::vector<grid::Cell> nodes_;                        // sorted by (y, x)
  std::vector<std::vector<std::pair<int, double>>> adj_; // (node, weight cells)
  grid::BinaryMap skeleton_;
  std::vector<int> node_index_;                          // per-cell node id or -1
};

struct PathPlan {
  std::vector<geo::Pose2D> waypoints;  // meters; headings face the successor
  std::vector<grid::Cell> cells;       // full skeleton cell path
  double length_m = 0.0;
};

struct PlanOutcome {
  std::optional<PathPlan> plan;  // empty when no path exists
};

// Dijkstra between the snapped skeleton nodes of src and dst. Deterministic
// tie-breaking by node order. Waypoints are the collinear-simplified cell
// path; the final heading equals dst.theta. When `obstacles` is given, src or
// dst cells on an obstacle raise invalid_endpoint.
PlanOutcome plan_path(const VoronoiGraph& graph, const geo::Pose2D& src, const geo::Pose2D& dst,
                      const grid::BinaryMap* obstacles = nullptr);

}  // namespace marknav::plan
