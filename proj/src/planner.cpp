#include "marknav/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>

#include "marknav/mapping.hpp"

namespace marknav::plan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 1D squared-distance transform (Felzenszwalb/Huttenlocher lower envelope).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[static_cast<std::size_t>(k)];
      s = ((f[static_cast<std::size_t>(q)] + q * q) - (f[static_cast<std::size_t>(p)] + p * p)) /
          (2.0 * q - 2.0 * p);
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    z[static_cast<std::size_t>(k)] = s;
    z[static_cast<std::size_t>(k) + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(k) + 1] < q) ++k;
    const int p = v[static_cast<std::size_t>(k)];
    d[static_cast<std::size_t>(q)] =
        (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace

ClearanceMap clearance_map(const grid::BinaryMap& obstacles) {
  const int w = obstacles.width, h = obstacles.height;
  std::size_t n_obst = obstacles.count();
  if (n_obst == 0) fail(Errc::degenerate_input, "clearance map needs at least one obstacle cell");
  if (n_obst == static_cast<std::size_t>(w) * h)
    fail(Errc::degenerate_input, "clearance map of an all-obstacle map is degenerate");

  // Squared EDT: columns then rows.
  std::vector<double> g(static_cast<std::size_t>(w) * h);
  {
    std::vector<double> f(static_cast<std::size_t>(h)), d(static_cast<std::size_t>(h));
    std::vector<int> v(static_cast<std::size_t>(h));
    std::vector<double> z(static_cast<std::size_t>(h) + 1);
    for (int x = 0; x < w; ++x) {
      for (int y = 0; y < h; ++y)
        f[static_cast<std::size_t>(y)] = obstacles.at(x, y) ? 0.0 : kInf;
      edt_1d(f, d, v, z);
      for (int y = 0; y < h; ++y) g[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
    }
  }
  ClearanceMap out;
  out.width = w;
  out.height = h;
  out.dist.resize(g.size());
  {
    std::vector<double> f(static_cast<std::size_t>(w)), d(static_cast<std::size_t>(w));
    std::vector<int> v(static_cast<std::size_t>(w));
    std::vector<double> z(static_cast<std::size_t>(w) + 1);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x)] = g[static_cast<std::size_t>(y) * w + x];
      edt_1d(f, d, v, z);
      for (int x = 0; x < w; ++x)
        out.dist[static_cast<std::size_t>(y) * w + x] = std::sqrt(d[static_cast<std::size_t>(x)]);
    }
  }
  return out;
}

namespace {

// (8,4) simple-point table: deletion of the center preserves local topology.
const std::array<bool, 256>& simple_point_table() {
  static const std::array<bool, 256> table = [] {
    std::array<bool, 256> t{};
    // Neighbour bit layout (bit i):
    //   7 6 5
    //   0 . 4
    //   1 2 3
    const int nx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
    const int ny[8] = {0, -1, -1, -1, 0, 1, 1, 1};
    for (int mask = 0; mask < 256; ++mask) {
      bool fg[3][3] = {};
      for (int i = 0; i < 8; ++i)
        if (mask & (1 << i)) fg[ny[i] + 1][nx[i] + 1] = true;
      // Count 8-connected foreground components among the 8 neighbours.
      bool seen[3][3] = {};
      int fg_comps = 0;
      for (int yy = 0; yy < 3; ++yy)
        for (int xx = 0; xx < 3; ++xx) {
          if ((xx == 1 && yy == 1) || !fg[yy][xx] || seen[yy][xx]) continue;
          ++fg_comps;
          // Flood fill within the 8-neighbour ring (8-connectivity).
          std::vector<std::pair<int, int>> stack{{xx, yy}};
          seen[yy][xx] = true;
          while (!stack.empty()) {
            auto [cx, cy] = stack.back();
            stack.pop_back();
            for (int dy = -1; dy <= 1; ++dy)
              for (int dx = -1; dx <= 1; ++dx) {
                const int px = cx + dx, py = cy + dy;
                if (px < 0 || px > 2 || py < 0 || py > 2) continue;
                if (px == 1 && py == 1) continue;
                if (!fg[py][px] || seen[py][px]) continue;
                seen[py][px] = true;
                stack.push_back({px, py});
              }
          }
        }
      // Count 4-connected background components 4-adjacent to the center.
      bool bseen[3][3] = {};
      int bg_comps = 0;
      const int four_x[4] = {1, 0, 1, 2};
      const int four_y[4] = {0, 1, 2, 1};
      for (int s = 0; s < 4; ++s) {
        const int xx = four_x[s], yy = four_y[s];
        if (fg[yy][xx] || bseen[yy][xx]) continue;
        ++bg_comps;
        std::vector<std::pair<int, int>> stack{{xx, yy}};
        bseen[yy][xx] = true;
        while (!stack.empty()) {
          auto [cx, cy] = stack.back();
          stack.pop_back();
          const int d4x[4] = {1, -1, 0, 0};
          const int d4y[4] = {0, 0, 1, -1};
          for (int k = 0; k < 4; ++k) {
            const int px = cx + d4x[k], py = cy + d4y[k];
            if (px < 0 || px > 2 || py < 0 || py > 2) continue;
            if (px == 1 && py == 1) continue;
            if (fg[py][px] || bseen[py][px]) continue;
            bseen[py][px] = true;
            stack.push_back({px, py});
          }
        }
      }
      t[static_cast<std::size_t>(mask)] = (fg_comps == 1 && bg_comps == 1);
    }
    return t;
  }();
  return table;
}

int neighbour_mask(const grid::BinaryMap& img, int x, int y) {
  const int nx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  const int ny[8] = {0, -1, -1, -1, 0, 1, 1, 1};
  int mask = 0;
  for (int i = 0; i < 8; ++i)
    if (img.set(x + nx[i], y + ny[i])) mask |= 1 << i;
  return mask;
}

}  // namespace

grid::BinaryMap voronoi_boundaries(const ClearanceMap& clearance,
                                   const grid::BinaryMap& obstacles) {
  const int w = clearance.width, h = clearance.height;
  grid::BinaryMap skel(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) skel.at(x, y) = obstacles.at(x, y) ? 0 : 1;

  // Maximal-disc anchors: the disc at p is contained in a neighbour's disc
  // iff d(q) >= d(p) + |p-q|; cells with no containing neighbour are kept.
  grid::BinaryMap anchor(w, h);
  const double sq2 = std::sqrt(2.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!skel.at(x, y)) continue;
      const double dp = clearance.at(x, y);
      bool contained = false;
      for (int dy = -1; dy <= 1 && !contained; ++dy)
        for (int dx = -1; dx <= 1 && !contained; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          if (obstacles.at(nx, ny)) continue;
          const double step = (dx != 0 && dy != 0) ? sq2 : 1.0;
          if (clearance.at(nx, ny) >= dp + step - 1e-9) contained = true;
        }
      if (!contained) anchor.at(x, y) = 1;
    }

  // Distance-ordered homotopic thinning: repeatedly delete non-anchor simple
  // points, lowest clearance first.
  std::vector<grid::Cell> order;
  order.reserve(skel.count());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (skel.at(x, y)) order.push_back({x, y});
  std::sort(order.begin(), order.end(), [&](grid::Cell a, grid::Cell b) {
    const double da = clearance.at(a.x, a.y), db = clearance.at(b.x, b.y);
    if (da != db) return da < db;
    return a < b;
  });
  const auto& simple = simple_point_table();
  bool changed = true;
  while (changed) {
    changed = false;
    for (const grid::Cell& c : order) {
      if (!skel.at(c.x, c.y) || anchor.at(c.x, c.y)) continue;
      if (simple[static_cast<std::size_t>(neighbour_mask(skel, c.x, c.y))]) {
        skel.at(c.x, c.y) = 0;
        changed = true;
      }
    }
  }

  // Final tidy: collapse residual 2-px bands (even-width ridges) while
  // preserving connectivity; 1-px strokes and endpoints are left intact.
  return map::thin(skel);
}

VoronoiGraph::VoronoiGraph(const grid::BinaryMap& skeleton, double res, int ox, int oy)
    : resolution(res), origin_x(ox), origin_y(oy), skeleton_(skeleton) {
  node_index_.assign(static_cast<std::size_t>(skeleton.width) * skeleton.height, -1);
  for (int y = 0; y < skeleton.height; ++y)
    for (int x = 0; x < skeleton.width; ++x)
      if (skeleton.at(x, y)) {
        node_index_[static_cast<std::size_t>(y) * skeleton.width + x] =
            static_cast<int>(nodes_.size());
        nodes_.push_back({x, y});
      }
  adj_.resize(nodes_.size());
  const double sq2 = std::sqrt(2.0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const grid::Cell c = nodes_[i];
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = c.x + dx, ny = c.y + dy;
        if (!skeleton.in_bounds(nx, ny) || !skeleton.at(nx, ny)) continue;
        const int j = node_index_[static_cast<std::size_t>(ny) * skeleton.width + nx];
        adj_[i].push_back({j, (dx != 0 && dy != 0) ? sq2 : 1.0});
      }
  }
}

int VoronoiGraph::node_at(grid::Cell c) const {
  if (!skeleton_.in_bounds(c.x, c.y)) return -1;
  return node_index_[static_cast<std::size_t>(c.y) * skeleton_.width + c.x];
}

int VoronoiGraph::snap(grid::Cell c) const {
  if (nodes_.empty()) return -1;
  int best = 0;
  long long best_d2 = std::numeric_limits<long long>::max();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const long long dx = nodes_[i].x - c.x;
    const long long dy = nodes_[i].y - c.y;
    const long long d2 = dx * dx + dy * dy;
    // Nodes are (y, x)-sorted, so strict < yields the lowest (y, x) tie.
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(i);
    }
  }
  return best;
}

PlanOutcome plan_path(const VoronoiGraph& graph, const geo::Pose2D& src, const geo::Pose2D& dst,
                      const grid::BinaryMap* obstacles) {
  if (graph.empty()) fail(Errc::degenerate_input, "empty skeleton graph");
  const grid::Cell src_cell{graph.world_to_cell_x(src.x), graph.world_to_cell_y(src.y)};
  const grid::Cell dst_cell{graph.world_to_cell_x(dst.x), graph.world_to_cell_y(dst.y)};
  if (obstacles) {
    if (obstacles->set(src_cell.x, src_cell.y) || !obstacles->in_bounds(src_cell.x, src_cell.y))
      fail(Errc::invalid_endpoint, "source pose lies on an obstacle or outside the map");
    if (obstacles->set(dst_cell.x, dst_cell.y) || !obstacles->in_bounds(dst_cell.x, dst_cell.y))
      fail(Errc::invalid_endpoint, "destination pose lies on an obstacle or outside the map");
  }
  const int s = graph.snap(src_cell);
  const int t = graph.snap(dst_cell);

  const std::size_t n = graph.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
  dist[static_cast<std::size_t>(s)] = 0.0;
  pq.push({0.0, s});
  std::vector<bool> done(n, false);
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (done[static_cast<std::size_t>(u)]) continue;
    done[static_cast<std::size_t>(u)] = true;
    if (u == t) break;
    for (const auto& [v, wgt] : graph.neighbors(u)) {
      const double nd = d + wgt;
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        prev[static_cast<std::size_t>(v)] = u;
        pq.push({nd, v});
      }
    }
  }
  if (!std::isfinite(dist[static_cast<std::size_t>(t)]))
    return {};  // disconnected components: explicit no-path

  PathPlan plan;
  std::vector<int> chain;
  for (int u = t; u != -1; u = prev[static_cast<std::size_t>(u)]) chain.push_back(u);
  std::reverse(chain.begin(), chain.end());
  for (int u : chain) plan.cells.push_back(graph.nodes()[static_cast<std::size_t>(u)]);
  plan.length_m = dist[static_cast<std::size_t>(t)] / graph.resolution;

  // Collapse collinear runs to segment endpoints.
  std::vector<grid::Cell> simplified;
  for (std::size_t i = 0; i < plan.cells.size(); ++i) {
    if (i == 0 || i + 1 == plan.cells.size()) {
      simplified.push_back(plan.cells[i]);
      continue;
    }
    const int dx1 = plan.cells[i].x - plan.cells[i - 1].x;
    const int dy1 = plan.cells[i].y - plan.cells[i - 1].y;
    const int dx2 = plan.cells[i + 1].x - plan.cells[i].x;
    const int dy2 = plan.cells[i + 1].y - plan.cells[i].y;
    if (dx1 != dx2 || dy1 != dy2) simplified.push_back(plan.cells[i]);
  }

  for (std::size_t i = 0; i < simplified.size(); ++i) {
    geo::Pose2D wp{graph.cell_center_x(simplified[i].x), graph.cell_center_y(simplified[i].y),
                   dst.theta};
    if (i + 1 < simplified.size()) {
      const double nx = graph.cell_center_x(simplified[i + 1].x);
      const double ny = graph.cell_center_y(simplified[i + 1].y);
      wp.theta = std::atan2(ny - wp.y, nx - wp.x);
    }
    plan.waypoints.push_back(wp);
  }
  return {plan};
}

}  // namespace marknav::plan
