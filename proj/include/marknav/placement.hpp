#pragma once

#include <map>
#include <vector>

#include "marknav/grid.hpp"

namespace marknav::place {

// Axis-aligned rectangle of free cells, stored as inclusive cell bounds.
// Centroid coordinates use the integer midpoint (biased low on even spans).
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive

  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
  int cx() const { return (x0 + x1) / 2; }
  int cy() const { return (y0 + y1) / 2; }
  bool operator==(const Rect&) const = default;
};

// Deduplicated marker-position candidates in cell coordinates, ordered by
// (y, x).
struct CandidateSet {
  std::vector<grid::Cell> positions;
};

// Per-candidate covered free cells plus the coverage fraction over all free
// cells.
struct CoverageMask {
  grid::BitGrid covered;
  std::size_t covered_count = 0;
};

// Marker size (cm) -> coverage radius in cells, derived from the tracking
// distance at the map resolution.
struct MarkerRangeSpec {
  std::map<int, double> tracking_m_by_size_cm;

  int range_cells(int size_cm, double resolution) const;
};

// Decompose the traversable free space into rectangles by a left-to-right
// column sweep: a rectangle opens at every vertical edge (column interval
// change) and closes when its interval changes or the map ends. The union of
// the returned rectangles equals the set of free cells exactly.
// `traversable` has 1 = free; the map must be binary by construction.
std::vector<Rect> rectangular_decomposition(const grid::BinaryMap& traversable);

// Candidate generation: rectangles larger than the range r (cells) are split
// ceil-evenly along the oversized dimension; every resulting rectangle
// contributes its centroid, plus its four corner cells when both dimensions
// are below r/2.
CandidateSet generate_candidates(const std::vector<Rect>& rects, int range_cells);

// Cells covered by a candidate: free cells within `range_cells` (Euclidean,
// cell centers) whose discrete line from the candidate crosses no non-free
// cell. Throws invalid_pose when the candidate is not free.
CoverageMask coverage_raytrace(const grid::BinaryMap& traversable, grid::Cell candidate,
                               int range_cells);

struct ReductionResult {
  CandidateSet kept;
  std::vector<CoverageMask> masks;        // parallel to kept.positions
  std::size_t free_cells = 0;
  std::size_t initial_candidates = 0;
};

// Greedy single-removal reduction: while some candidate can be dropped
// without losing full coverage, drop the one that keeps the maximum remaining
// overlap (ties by lowest (y, x)). Throws infeasible_coverage when the
// initial set does not cover every free cell.
ReductionResult reduce_markers(const CandidateSet& candidates,
                               const grid::BinaryMap& traversable, int range_cells);

// Map each path point to the covering marker with the least Euclidean
// distance (ties to the lowest marker index). Throws coverage_violation when
// a point is covered by no mask.
std::vector<int> associate_path_points(const std::vector<grid::Cell>& path_points,
                                       const CandidateSet& markers,
                                       const std::vector<CoverageMask>& masks);

}  // namespace marknav::place
