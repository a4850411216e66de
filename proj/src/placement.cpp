#include "marknav/placement.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "marknav/planner.hpp"

namespace marknav::place {

int MarkerRangeSpec::range_cells(int size_cm, double resolution) const {
  auto it = tracking_m_by_size_cm.find(size_cm);
  if (it == tracking_m_by_size_cm.end())
    fail(Errc::config, "no tracking range for marker size " + std::to_string(size_cm) + " cm");
  if (it->second <= 0) fail(Errc::config, "tracking range must be positive");
  return static_cast<int>(std::lround(it->second * resolution));
}

std::vector<Rect> rectangular_decomposition(const grid::BinaryMap& traversable) {
  for (auto v : traversable.cells)
    if (v > 1) fail(Errc::config, "decomposition input must be binary");

  struct Interval {
    int y0, y1;
    bool operator<(const Interval& o) const {
      return y0 != o.y0 ? y0 < o.y0 : y1 < o.y1;
    }
    bool operator==(const Interval&) const = default;
  };

  std::vector<Rect> out;
  std::map<Interval, int> open;  // interval -> opening column
  for (int x = 0; x <= traversable.width; ++x) {
    std::set<Interval> column;
    if (x < traversable.width) {
      int y = 0;
      while (y < traversable.height) {
        if (!traversable.at(x, y)) {
          ++y;
          continue;
        }
        const int y0 = y;
        while (y < traversable.height && traversable.at(x, y)) ++y;
        column.insert({y0, y - 1});
      }
    }
    // Close rectangles whose interval vanished or changed; open new ones.
    for (auto it = open.begin(); it != open.end();) {
      if (column.count(it->first)) {
        ++it;
      } else {
        out.push_back({it->second, it->first.y0, x - 1, it->first.y1});
        it = open.erase(it);
      }
    }
    for (const Interval& iv : column)
      if (!open.count(iv)) open[iv] = x;
  }
  std::sort(out.begin(), out.end(), [](const Rect& a, const Rect& b) {
    if (a.y0 != b.y0) return a.y0 < b.y0;
    if (a.x0 != b.x0) return a.x0 < b.x0;
    return a.x1 < b.x1;
  });
  return out;
}

namespace {

// Split [0, n) into k near-equal chunks; returns chunk boundaries.
std::vector<int> even_splits(int n, int k) {
  std::vector<int> bounds(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i)
    bounds[static_cast<std::size_t>(i)] = static_cast<int>(
        static_cast<long long>(n) * i / k);
  return bounds;
}

}  // namespace

CandidateSet generate_candidates(const std::vector<Rect>& rects, int range_cells) {
  if (range_cells <= 0) fail(Errc::config, "candidate range must be positive");
  std::set<grid::Cell> unique;
  for (const Rect& r : rects) {
    const int nx = (r.width() + range_cells - 1) / range_cells;
    const int ny = (r.height() + range_cells - 1) / range_cells;
    const auto xb = even_splits(r.width(), std::max(nx, 1));
    const auto yb = even_splits(r.height(), std::max(ny, 1));
    for (std::size_t iy = 0; iy + 1 < yb.size(); ++iy)
      for (std::size_t ix = 0; ix + 1 < xb.size(); ++ix) {
        const Rect seg{r.x0 + xb[ix], r.y0 + yb[iy], r.x0 + xb[ix + 1] - 1,
                       r.y0 + yb[iy + 1] - 1};
        unique.insert({seg.cx(), seg.cy()});
        // Corner rule: small pockets get their corners as extra candidates.
        if (2 * seg.width() < range_cells && 2 * seg.height() < range_cells) {
          unique.insert({seg.x0, seg.y0});
          unique.insert({seg.x1, seg.y0});
          unique.insert({seg.x0, seg.y1});
          unique.insert({seg.x1, seg.y1});
        }
      }
  }
  CandidateSet out;
  out.positions.assign(unique.begin(), unique.end());
  return out;
}

CoverageMask coverage_raytrace(const grid::BinaryMap& traversable, grid::Cell candidate,
                               int range_cells) {
  if (!traversable.set(candidate.x, candidate.y))
    fail(Errc::invalid_pose, "coverage candidate lies on a non-free cell");
  CoverageMask mask;
  mask.covered = grid::BitGrid(traversable.width, traversable.height);
  const long long r2 = static_cast<long long>(range_cells) * range_cells;
  const int x_lo = std::max(0, candidate.x - range_cells);
  const int x_hi = std::min(traversable.width - 1, candidate.x + range_cells);
  const int y_lo = std::max(0, candidate.y - range_cells);
  const int y_hi = std::min(traversable.height - 1, candidate.y + range_cells);
  for (int y = y_lo; y <= y_hi; ++y)
    for (int x = x_lo; x <= x_hi; ++x) {
      if (!traversable.at(x, y)) continue;
      const long long dx = x - candidate.x;
      const long long dy = y - candidate.y;
      if (dx * dx + dy * dy > r2) continue;
      // The discrete line is always traced from the candidate outward.
      if (grid::line_of_sight(candidate, {x, y},
                              [&](grid::Cell c) { return !traversable.at(c.x, c.y); })) {
        mask.covered.set(x, y);
        ++mask.covered_count;
      }
    }
  return mask;
}

ReductionResult reduce_markers(const CandidateSet& candidates,
                               const grid::BinaryMap& traversable, int range_cells) {
  ReductionResult res;
  res.initial_candidates = candidates.positions.size();
  const grid::BitGrid free_bits = grid::BitGrid::from_binary(traversable);
  res.free_cells = free_bits.popcount();
  if (candidates.positions.empty()) fail(Errc::infeasible_coverage, "no candidates");

  std::vector<grid::Cell> pos = candidates.positions;
  std::vector<CoverageMask> masks;
  masks.reserve(pos.size());
  for (const grid::Cell& c : pos) masks.push_back(coverage_raytrace(traversable, c, range_cells));

  // Union check with diagnostics naming uncovered cells.
  grid::BitGrid uni(traversable.width, traversable.height);
  for (const CoverageMask& m : masks) uni.or_with(m.covered);
  if (!uni.contains(free_bits)) {
    std::string diag = "candidates do not cover all free cells; first uncovered:";
    int listed = 0;
    for (int y = 0; y < traversable.height && listed < 5; ++y)
      for (int x = 0; x < traversable.width && listed < 5; ++x)
        if (traversable.at(x, y) && !uni.get(x, y)) {
          diag += " (" + std::to_string(x) + "," + std::to_string(y) + ")";
          ++listed;
        }
    fail(Errc::infeasible_coverage, diag);
  }

  // Keep the candidate list ordered by clearance (descending): markers far
  // from obstacles cover more and are preferred keeps.
  {
    grid::BinaryMap obstacles(traversable.width, traversable.height);
    for (int y = 0; y < traversable.height; ++y)
      for (int x = 0; x < traversable.width; ++x) obstacles.at(x, y) = traversable.at(x, y) ? 0 : 1;
    const plan::ClearanceMap cm = plan::clearance_map(obstacles);
    std::vector<std::size_t> order(pos.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double ca = cm.at(pos[a].x, pos[a].y);
      const double cb = cm.at(pos[b].x, pos[b].y);
      if (ca != cb) return ca > cb;
      return pos[a] < pos[b];
    });
    std::vector<grid::Cell> p2;
    std::vector<CoverageMask> m2;
    for (std::size_t i : order) {
      p2.push_back(pos[i]);
      m2.push_back(std::move(masks[i]));
    }
    pos = std::move(p2);
    masks = std::move(m2);
  }

  // Iterative single removals. Remaining overlap after dropping i is
  // (total covered-cell count - |mask_i|) - free_cells, so the feasible drop
  // with the smallest mask maximizes it; ties break on the lowest (y, x).
  while (pos.size() > 1) {
    std::size_t total = 0;
    for (const CoverageMask& m : masks) total += m.covered_count;

    long long best_overlap = -1;
    std::size_t best_i = masks.size();
    for (std::size_t i = 0; i < masks.size(); ++i) {
      grid::BitGrid uni_wo(traversable.width, traversable.height);
      for (std::size_t j = 0; j < masks.size(); ++j)
        if (j != i) uni_wo.or_with(masks[j].covered);
      if (!uni_wo.contains(free_bits)) continue;
      const long long overlap =
          static_cast<long long>(total - masks[i].covered_count) -
          static_cast<long long>(res.free_cells);
      const bool better =
          overlap > best_overlap ||
          (overlap == best_overlap && best_i < masks.size() && pos[i] < pos[best_i]);
      if (better) {
        best_overlap = overlap;
        best_i = i;
      }
    }
    if (best_i == masks.size()) break;  // every removal loses coverage
    pos.erase(pos.begin() + static_cast<std::ptrdiff_t>(best_i));
    masks.erase(masks.begin() + static_cast<std::ptrdiff_t>(best_i));
  }

  // Deterministic output order for export and id assignment.
  std::vector<std::size_t> order(pos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pos[a] < pos[b]; });
  for (std::size_t i : order) {
    res.kept.positions.push_back(pos[i]);
    res.masks.push_back(std::move(masks[i]));
  }
  return res;
}

std::vector<int> associate_path_points(const std::vector<grid::Cell>& path_points,
                                       const CandidateSet& markers,
                                       const std::vector<CoverageMask>& masks) {
  if (markers.positions.size() != masks.size())
    fail(Errc::config, "marker/mask count mismatch");
  std::vector<int> out;
  out.reserve(path_points.size());
  for (const grid::Cell& p : path_points) {
    int best = -1;
    long long best_d2 = 0;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      if (!masks[i].covered.get(p.x, p.y)) continue;
      const long long dx = p.x - markers.positions[i].x;
      const long long dy = p.y - markers.positions[i].y;
      const long long d2 = dx * dx + dy * dy;
      if (best < 0 || d2 < best_d2) {
        best = static_cast<int>(i);
        best_d2 = d2;
      }
    }
    if (best < 0)
      fail(Errc::coverage_violation, "path point (" + std::to_string(p.x) + "," +
                                         std::to_string(p.y) + ") is not covered by any marker");
    out.push_back(best);
  }
  return out;
}

}  // namespace marknav::place
