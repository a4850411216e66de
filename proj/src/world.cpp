#include "marknav/world.hpp"

#include <cmath>
#include <limits>

#include "marknav/io.hpp"

namespace marknav::world {

void WorldModel::validate() const {
  if (obstacles.width <= 0 || obstacles.height <= 0)
    fail(Errc::config, "world bitmap must be non-empty");
  if (resolution <= 0) fail(Errc::config, "world resolution must be positive");
  for (const geo::Marker& m : markers) {
    if (!free_at(m.pose.x, m.pose.y))
      fail(Errc::config,
           "marker " + std::to_string(m.id) + " does not lie in free space");
  }
  geo::MarkerDatabase db(markers);  // checks id uniqueness and face counts
}

double cast_ray(const WorldModel& w, double x, double y, double angle, double max_range) {
  const double res = w.resolution;
  // Work in cell units; convert the result back to meters.
  double px = x * res + w.origin_x;
  double py = y * res + w.origin_y;
  const double dx = std::cos(angle);
  const double dy = std::sin(angle);
  int cx = static_cast<int>(std::floor(px));
  int cy = static_cast<int>(std::floor(py));
  if (!w.in_bounds(cx, cy) || w.obstacle(cx, cy)) return 0.0;

  const double max_t = max_range * res;
  const int step_x = dx > 0 ? 1 : -1;
  const int step_y = dy > 0 ? 1 : -1;
  const double inv_dx = dx != 0 ? 1.0 / dx : std::numeric_limits<double>::infinity();
  const double inv_dy = dy != 0 ? 1.0 / dy : std::numeric_limits<double>::infinity();
  double t_max_x = dx != 0 ? ((dx > 0 ? std::floor(px) + 1 - px : px - std::floor(px)) *
                              std::abs(inv_dx))
                           : std::numeric_limits<double>::infinity();
  double t_max_y = dy != 0 ? ((dy > 0 ? std::floor(py) + 1 - py : py - std::floor(py)) *
                              std::abs(inv_dy))
                           : std::numeric_limits<double>::infinity();
  const double t_delta_x = std::abs(inv_dx);
  const double t_delta_y = std::abs(inv_dy);

  while (true) {
    double t;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      t_max_x += t_delta_x;
      cx += step_x;
    } else {
      t = t_max_y;
      t_max_y += t_delta_y;
      cy += step_y;
    }
    if (t > max_t) return std::numeric_limits<double>::infinity();
    if (!w.in_bounds(cx, cy)) return std::numeric_limits<double>::infinity();
    if (w.obstacle(cx, cy)) return t / res;
  }
}

bool clear_line(const WorldModel& w, double x0, double y0, double x1, double y1) {
  const grid::Cell a{w.world_to_cell_x(x0), w.world_to_cell_y(y0)};
  const grid::Cell b{w.world_to_cell_x(x1), w.world_to_cell_y(y1)};
  return grid::line_of_sight(a, b, [&](grid::Cell c) { return w.obstacle(c.x, c.y); });
}

void save_world(const WorldModel& w, const std::filesystem::path& pgm_path,
                const std::vector<std::string>& header_lines) {
  io::write_grid(to_grid(w), pgm_path, 50, header_lines);
  std::filesystem::path markers_path = pgm_path;
  markers_path.replace_extension(".markers.csv");
  io::write_markers_csv(markers_path, w.markers, header_lines);
}

WorldModel load_world(const std::filesystem::path& pgm_path,
                      const std::filesystem::path& markers_csv) {
  const io::GridFile gf = io::read_grid(pgm_path);
  WorldModel w;
  w.resolution = gf.grid.resolution;
  w.origin_x = gf.grid.origin_x;
  w.origin_y = gf.grid.origin_y;
  w.obstacles = grid::BinaryMap(gf.grid.width, gf.grid.height);
  for (int y = 0; y < gf.grid.height; ++y)
    for (int x = 0; x < gf.grid.width; ++x) {
      const std::int8_t v = gf.grid.at(x, y);
      // Unknown cells are treated as non-traversable ground truth.
      w.obstacles.at(x, y) = (v < 0 || v >= gf.occupied_threshold) ? 1 : 0;
    }
  if (!markers_csv.empty()) w.markers = io::read_markers_csv(markers_csv);
  w.validate();
  return w;
}

grid::OccupancyGrid to_grid(const WorldModel& w) {
  grid::OccupancyGrid g(w.obstacles.width, w.obstacles.height, w.resolution, w.origin_x,
                        w.origin_y, 0);
  for (int y = 0; y < g.height; ++y)
    for (int x = 0; x < g.width; ++x)
      if (w.obstacles.at(x, y)) g.at(x, y) = 100;
  return g;
}

}  // namespace marknav::world
