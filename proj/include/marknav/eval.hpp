#pragma once

#include <optional>
#include <string>
#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/grid.hpp"

namespace marknav::eval {

// 2D point set; the unit tag is carried for reporting only.
struct PointSet2D {
  std::vector<double> xs;
  std::vector<double> ys;
  std::string unit = "cells";

  std::size_t size() const { return xs.size(); }
  void push(double x, double y) {
    xs.push_back(x);
    ys.push_back(y);
  }
};

// Grid-bucket nearest-neighbour index. Queries return exactly the brute-force
// minimum (same per-pair arithmetic, ties to the lowest point index).
class NnIndex {
 public:
  explicit NnIndex(const PointSet2D& points, double bucket_size = 0.0);

  struct Hit {
    double sqdist;
    std::size_t index;
  };
  Hit nearest(double qx, double qy) const;

 private:
  struct Bucket {
    std::vector<double> xs, ys;
    std::vector<std::size_t> ids;  // ascending original index
  };
  std::size_t bucket_of(long long bx, long long by) const;

  std::vector<Bucket> buckets_;
  double inv_bucket_ = 1.0;
  long long bx0_ = 0, by0_ = 0;
  int nbx_ = 1, nby_ = 1;
};

// Thinned obstacle cells of a grid (threshold then thin). Throws
// degenerate_input when nothing is occupied.
PointSet2D extract_obstacle_points(const grid::OccupancyGrid& g, int occupied_threshold = 50);

struct IcpResult {
  geo::Transform2D transform;  // maps source onto target
  int iterations = 0;
  double residual = 0.0;       // RMS point-to-NN distance after alignment
  bool degenerate = false;     // identity fallback (tiny or collinear input)
};

// Point-to-point ICP with closed-form rigid updates. Deterministic multi-start
// over a fixed set of initial rotations guards against shallow minima; the
// result with the lowest residual wins (ties to the earlier start).
IcpResult icp_align(const PointSet2D& source, const PointSet2D& target, int max_iter = 50,
                    double tol = 1e-9);

// Mean / root-mean-square distance from each source point to its nearest
// target point. Aggregation runs over sorted distances so the result is
// independent of point order.
double adnn(const PointSet2D& source, const PointSet2D& target);
double rmse(const PointSet2D& source, const PointSet2D& target);

// Symmetric variant: mean of the two directed ADNNs.
double adnn_symmetric(const PointSet2D& a, const PointSet2D& b);

struct TimedPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct AteOptions {
  bool align = true;        // rigid alignment before scoring
  double max_gap_s = 0.1;   // nearest-timestamp association window
};

// Absolute trajectory error: RMSE of position differences after
// nearest-timestamp association (and optional rigid alignment). Throws
// degenerate_input when no timestamps associate.
double ate(const std::vector<TimedPoint>& estimated, const std::vector<TimedPoint>& ground_truth,
           const AteOptions& opt = {});

struct EvalReport {
  double adnn_cells = 0.0;
  double adnn_cm = 0.0;
  double rmse_cells = 0.0;
  std::optional<double> ate_m;
  std::optional<double> ate_unaligned_m;
  int icp_iterations = 0;
  double icp_residual = 0.0;
  bool icp_degenerate = false;
  double runtime_s = 0.0;
  std::string environment = "unknown";
  std::string method = "marknav";
};

// Full map comparison: extract points from both grids, align evaluated ->
// truth with ICP, then score. cm conversion uses the truth grid resolution.
EvalReport evaluate_maps(const grid::OccupancyGrid& evaluated, const grid::OccupancyGrid& truth,
                         int occupied_threshold = 50);

}  // namespace marknav::eval
