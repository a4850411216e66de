#pragma once

// Shared fixtures for the unit and acceptance suites: synthetic worlds,
// random orthogonal maps, and small independent oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/grid.hpp"
#include "marknav/rng.hpp"
#include "marknav/world.hpp"

namespace testsup {

using marknav::Rng;
namespace geo = marknav::geo;
namespace grid = marknav::grid;
namespace world = marknav::world;

// Rectangular room with `wall` cells of wall thickness around the free
// interior of free_w x free_h cells. World origin at the lower-left free
// cell corner.
inline world::WorldModel make_room(int free_w, int free_h, double res = 20.0, int wall = 2) {
  world::WorldModel w;
  w.resolution = res;
  w.origin_x = wall;
  w.origin_y = wall;
  w.obstacles = grid::BinaryMap(free_w + 2 * wall, free_h + 2 * wall, 1);
  for (int y = 0; y < free_h; ++y)
    for (int x = 0; x < free_w; ++x) w.obstacles.at(x + wall, y + wall) = 0;
  return w;
}

// Corridor of the given free width/length in meters.
inline world::WorldModel make_corridor(double length_m, double width_m, double res = 20.0) {
  return make_room(static_cast<int>(std::lround(length_m * res)),
                   static_cast<int>(std::lround(width_m * res)), res);
}

inline void carve_rect(world::WorldModel& w, int x0, int y0, int x1, int y1, bool obstacle) {
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (w.obstacles.in_bounds(x + w.origin_x, y + w.origin_y))
        w.obstacles.at(x + w.origin_x, y + w.origin_y) = obstacle ? 1 : 0;
}

inline geo::Marker make_marker(int id, double x, double y, double theta_deg, double size_m = 0.2,
                               int faces = 4) {
  geo::Marker m;
  m.id = id;
  m.pose = {x, y, geo::normalize_angle(geo::deg2rad(theta_deg))};
  m.size_m = size_m;
  m.faces = faces;
  return m;
}

// Random orthogonal world: rooms connected by corridors, plus pillars.
// Guaranteed connected free space.
inline world::WorldModel random_orthogonal_world(Rng& rng, int width_cells = 120,
                                                 int height_cells = 90) {
  world::WorldModel w;
  w.resolution = 20.0;
  w.origin_x = 0;
  w.origin_y = 0;
  w.obstacles = grid::BinaryMap(width_cells, height_cells, 1);

  struct Room {
    int x0, y0, x1, y1;
    int cx() const { return (x0 + x1) / 2; }
    int cy() const { return (y0 + y1) / 2; }
  };
  std::vector<Room> rooms;
  const int n_rooms = 3 + static_cast<int>(rng.below(3));
  for (int i = 0; i < n_rooms; ++i) {
    const int rw = 20 + static_cast<int>(rng.below(30));
    const int rh = 16 + static_cast<int>(rng.below(24));
    const int x0 = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(width_cells - rw - 4)));
    const int y0 =
        2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(height_cells - rh - 4)));
    rooms.push_back({x0, y0, x0 + rw - 1, y0 + rh - 1});
  }
  for (const Room& r : rooms)
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) w.obstacles.at(x, y) = 0;
  // L-shaped corridors (width 9 cells) between consecutive room centers.
  const int half = 4;
  for (std::size_t i = 1; i < rooms.size(); ++i) {
    const Room& a = rooms[i - 1];
    const Room& b = rooms[i];
    const int x_lo = std::min(a.cx(), b.cx()), x_hi = std::max(a.cx(), b.cx());
    for (int x = x_lo; x <= x_hi; ++x)
      for (int dy = -half; dy <= half; ++dy) {
        const int y = a.cy() + dy;
        if (y >= 0 && y < height_cells) w.obstacles.at(x, y) = 0;
      }
    const int y_lo = std::min(a.cy(), b.cy()), y_hi = std::max(a.cy(), b.cy());
    for (int y = y_lo; y <= y_hi; ++y)
      for (int dx = -half; dx <= half; ++dx) {
        const int x = b.cx() + dx;
        if (x >= 0 && x < width_cells) w.obstacles.at(x, y) = 0;
      }
  }
  // A few pillars that do not disconnect anything (small and interior).
  for (const Room& r : rooms) {
    if (rng.uniform() < 0.5) continue;
    const int pw = 2 + static_cast<int>(rng.below(3));
    const int ph = 2 + static_cast<int>(rng.below(3));
    const int px = r.x0 + 4 + static_cast<int>(rng.below(
                                  static_cast<std::uint64_t>(std::max(1, r.x1 - r.x0 - pw - 8))));
    const int py = r.y0 + 4 + static_cast<int>(rng.below(
                                  static_cast<std::uint64_t>(std::max(1, r.y1 - r.y0 - ph - 8))));
    for (int y = py; y < py + ph; ++y)
      for (int x = px; x < px + pw; ++x) w.obstacles.at(x, y) = 1;
  }
  return w;
}

// --- Independent oracles -----------------------------------------------------

// O(n*m) nearest-neighbour scan (plain loops, lowest index on ties).
inline double brute_min_dist(double qx, double qy, const std::vector<double>& xs,
                             const std::vector<double>& ys) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - qx;
    const double dy = ys[i] - qy;
    const double d = dx * dx + dy * dy;
    if (d < best) best = d;
  }
  return best;
}

// Brute-force EDT value at one cell.
inline double brute_edt(const grid::BinaryMap& obstacles, int cx, int cy) {
  long long best = std::numeric_limits<long long>::max();
  for (int y = 0; y < obstacles.height; ++y)
    for (int x = 0; x < obstacles.width; ++x) {
      if (!obstacles.at(x, y)) continue;
      const long long dx = x - cx, dy = y - cy;
      best = std::min(best, dx * dx + dy * dy);
    }
  return std::sqrt(static_cast<double>(best));
}

// Exhaustive-enumeration shortest path on small undirected graphs: DFS over
// every simple path from s to t, returning the minimum total weight.
struct SmallGraph {
  int n = 0;
  std::vector<std::array<double, 3>> edges;  // (a, b, weight), undirected
};

inline void enumerate_paths(const SmallGraph& g, int u, int t, std::vector<bool>& used,
                            double acc, double& best) {
  if (u == t) {
    best = std::min(best, acc);
    return;
  }
  for (const auto& e : g.edges) {
    const int a = static_cast<int>(e[0]);
    const int b = static_cast<int>(e[1]);
    int v = -1;
    if (a == u) v = b;
    if (b == u) v = a;
    if (v < 0 || used[static_cast<std::size_t>(v)]) continue;
    used[static_cast<std::size_t>(v)] = true;
    enumerate_paths(g, v, t, used, acc + e[2], best);
    used[static_cast<std::size_t>(v)] = false;
  }
}

inline double oracle_shortest_path(const SmallGraph& g, int s, int t) {
  std::vector<bool> used(static_cast<std::size_t>(g.n), false);
  used[static_cast<std::size_t>(s)] = true;
  double best = std::numeric_limits<double>::infinity();
  enumerate_paths(g, s, t, used, 0.0, best);
  return best;
}

}  // namespace testsup
