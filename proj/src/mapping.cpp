#include "marknav/mapping.hpp"

#include <algorithm>
#include <cmath>

namespace marknav::map {

CleanScan preprocess_scan(const sim::RawScan& raw, double ceiling) {
  if (raw.ranges.empty()) fail(Errc::unusable_scan, "empty scan");
  CleanScan out;
  out.fov = raw.fov;
  out.ceiling = ceiling;
  out.ranges.resize(raw.ranges.size());

  // Pass 1: clamp. Non-positive readings are sensor glitches and are treated
  // like NaN dropouts.
  std::vector<bool> known(raw.ranges.size(), false);
  std::size_t known_count = 0;
  for (std::size_t i = 0; i < raw.ranges.size(); ++i) {
    const double r = raw.ranges[i];
    if (std::isnan(r) || r <= 0.0) continue;
    out.ranges[i] = std::min(r, ceiling);  // +inf clamps too
    known[i] = true;
    ++known_count;
  }
  if (known_count == 0) fail(Errc::unusable_scan, "scan contains no finite range");

  // Pass 2: fill gaps by linear interpolation; edges copy the nearest value.
  std::size_t i = 0;
  while (i < out.ranges.size()) {
    if (known[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < out.ranges.size() && !known[j]) ++j;
    const bool has_left = i > 0;
    const bool has_right = j < out.ranges.size();
    for (std::size_t k = i; k < j; ++k) {
      if (has_left && has_right) {
        const double left = out.ranges[i - 1];
        const double right = out.ranges[j];
        const double t = static_cast<double>(k - (i - 1)) / static_cast<double>(j - (i - 1));
        out.ranges[k] = left + (right - left) * t;
      } else if (has_left) {
        out.ranges[k] = out.ranges[i - 1];
      } else {
        out.ranges[k] = out.ranges[j];
      }
    }
    i = j;
  }
  return out;
}

grid::OccupancyGrid raytrace_local(const CleanScan& scan, double resolution) {
  if (scan.ranges.size() < 2) fail(Errc::unusable_scan, "scan must have at least two beams");
  const int radius = static_cast<int>(std::ceil(scan.ceiling * resolution)) + 1;
  const int side = 2 * radius + 1;
  grid::OccupancyGrid local(side, side, resolution, radius, radius, -1);
  const grid::Cell origin{radius, radius};

  // Free space first, then endpoints, so an endpoint from one beam is never
  // demoted by the free trace of another.
  std::vector<grid::Cell> endpoints;
  endpoints.reserve(scan.ranges.size());
  for (std::size_t i = 0; i < scan.ranges.size(); ++i) {
    const double b = scan.bearing(i);
    const double r = scan.ranges[i];
    const grid::Cell end{local.world_to_cell_x(r * std::cos(b)),
                         local.world_to_cell_y(r * std::sin(b))};
    const auto cells = grid::line_cells(origin, end);
    for (std::size_t k = 0; k + 1 < cells.size(); ++k)
      if (local.in_bounds(cells[k].x, cells[k].y)) local.at(cells[k].x, cells[k].y) = 0;
    if (r < scan.ceiling) {
      endpoints.push_back(end);
    } else if (local.in_bounds(end.x, end.y) && local.at(end.x, end.y) == -1) {
      // Ceiling-clipped beam: the terminal cell is traversed, not an obstacle.
      local.at(end.x, end.y) = 0;
    }
  }
  for (const grid::Cell& e : endpoints)
    if (local.in_bounds(e.x, e.y)) local.at(e.x, e.y) = 100;
  // "Possible obstacle" ring: only cells carrying no direct evidence yet.
  for (const grid::Cell& e : endpoints)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = e.x + dx, ny = e.y + dy;
        if (local.in_bounds(nx, ny) && local.at(nx, ny) == -1) local.at(nx, ny) = 50;
      }
  return local;
}

GlobalMapper::GlobalMapper(grid::OccupancyGrid initial, SensorModel model, bool auto_grow)
    : grid_(std::move(initial)),
      log_odds_(grid_.cells.size(), 0.0),
      counts_(grid_.cells.size(), 0),
      model_(model),
      auto_grow_(auto_grow) {
  // Seed log-odds from any pre-existing cell values.
  for (std::size_t i = 0; i < grid_.cells.size(); ++i) {
    const std::int8_t v = grid_.cells[i];
    if (v >= 0) {
      const double p = std::clamp(v / 100.0, 0.001, 0.999);
      log_odds_[i] = std::log(p / (1.0 - p));
      counts_[i] = 1;
    }
  }
}

double GlobalMapper::probability_at(int x, int y) const {
  const double l = log_odds_[static_cast<std::size_t>(y) * grid_.width + x];
  return 1.0 / (1.0 + std::exp(-l));
}

void GlobalMapper::update_cell(int gx, int gy, double p_meas) {
  if (!grid_.in_bounds(gx, gy)) {
    if (!auto_grow_)
      fail(Errc::invalid_pose, "fusion outside grid bounds (enable auto_grow to extend)");
    grow_to_include(gx, gy);
  }
  const std::size_t idx = static_cast<std::size_t>(gy) * grid_.width + gx;
  log_odds_[idx] += std::log(p_meas / (1.0 - p_meas));
  counts_[idx] += 1;
  const double p = 1.0 / (1.0 + std::exp(-log_odds_[idx]));
  grid_.cells[idx] = static_cast<std::int8_t>(std::lround(100.0 * p));
}

void GlobalMapper::grow_to_include(int gx, int gy) {
  int pad_left = std::max(0, -gx);
  int pad_down = std::max(0, -gy);
  int pad_right = std::max(0, gx - (grid_.width - 1));
  int pad_up = std::max(0, gy - (grid_.height - 1));
  // Grow generously to amortize repeated extensions.
  const int chunk = 64;
  const auto round_up = [&](int v) { return v == 0 ? 0 : ((v + chunk - 1) / chunk) * chunk; };
  pad_left = round_up(pad_left);
  pad_down = round_up(pad_down);
  pad_right = round_up(pad_right);
  pad_up = round_up(pad_up);

  grid::OccupancyGrid bigger(grid_.width + pad_left + pad_right,
                             grid_.height + pad_down + pad_up, grid_.resolution,
                             grid_.origin_x + pad_left, grid_.origin_y + pad_down, -1);
  std::vector<double> lo(bigger.cells.size(), 0.0);
  std::vector<std::uint32_t> ct(bigger.cells.size(), 0);
  for (int y = 0; y < grid_.height; ++y)
    for (int x = 0; x < grid_.width; ++x) {
      const std::size_t src = static_cast<std::size_t>(y) * grid_.width + x;
      const std::size_t dst =
          static_cast<std::size_t>(y + pad_down) * bigger.width + (x + pad_left);
      bigger.cells[dst] = grid_.cells[src];
      lo[dst] = log_odds_[src];
      ct[dst] = counts_[src];
    }
  grid_ = std::move(bigger);
  log_odds_ = std::move(lo);
  counts_ = std::move(ct);
}

void GlobalMapper::fuse(const grid::OccupancyGrid& local, const geo::Pose2D& robot_pose) {
  const double c = std::cos(robot_pose.theta), s = std::sin(robot_pose.theta);
  for (int ly = 0; ly < local.height; ++ly)
    for (int lx = 0; lx < local.width; ++lx) {
      const std::int8_t v = local.at(lx, ly);
      if (v < 0) continue;
      double p_meas;
      if (v == 0)
        p_meas = model_.p_free;
      else if (v == 100)
        p_meas = model_.p_hit;
      else
        p_meas = model_.p_near;
      const double ox = local.cell_center_x(lx);
      const double oy = local.cell_center_y(ly);
      const double wx = robot_pose.x + c * ox - s * oy;
      const double wy = robot_pose.y + s * ox + c * oy;
      update_cell(grid_.world_to_cell_x(wx), grid_.world_to_cell_y(wy), p_meas);
    }
}

grid::BinaryMap binarize(const grid::OccupancyGrid& g, int occupied_threshold) {
  grid::BinaryMap out(g.width, g.height);
  // Bit-packed threshold (unknown is -1 < threshold, so it lands on 0), then
  // unpack into the byte raster the morphology code works on.
  grid::BitGrid bits(g.width, g.height);
  kern::threshold_bits(g.cells.data(), g.cells.size(),
                       static_cast<std::int8_t>(occupied_threshold), bits.data());
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) out.at(x, y) = bits.get(x, y) ? 1 : 0;
  return out;
}

grid::BinaryMap known_free_mask(const grid::OccupancyGrid& g, int occupied_threshold) {
  grid::BinaryMap out(g.width, g.height);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x) {
      const std::int8_t v = g.at(x, y);
      out.at(x, y) = (v >= 0 && v < occupied_threshold) ? 1 : 0;
    }
  return out;
}

grid::BinaryMap thin(const grid::BinaryMap& m) {
  grid::BinaryMap img = m;
  const auto at = [&](int x, int y) -> int { return img.set(x, y) ? 1 : 0; };
  bool changed = true;
  std::vector<grid::Cell> to_clear;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      to_clear.clear();
      for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
          if (!img.at(x, y)) continue;
          const int p2 = at(x, y + 1), p3 = at(x + 1, y + 1), p4 = at(x + 1, y);
          const int p5 = at(x + 1, y - 1), p6 = at(x, y - 1), p7 = at(x - 1, y - 1);
          const int p8 = at(x - 1, y), p9 = at(x - 1, y + 1);
          const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
          if (b < 2 || b > 6) continue;
          const int a = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) + (p4 == 0 && p5 == 1) +
                        (p5 == 0 && p6 == 1) + (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                        (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
          if (a != 1) continue;
          if (pass == 0) {
            if (p2 * p4 * p6 != 0 || p4 * p6 * p8 != 0) continue;
          } else {
            if (p2 * p4 * p8 != 0 || p2 * p6 * p8 != 0) continue;
          }
          to_clear.push_back({x, y});
        }
      for (const grid::Cell& c : to_clear) img.at(c.x, c.y) = 0;
      changed = changed || !to_clear.empty();
    }
  }
  return img;
}

}  // namespace marknav::map
