#include "marknav/grid.hpp"

#include <cmath>
#include <cstdlib>

namespace marknav::grid {

BitGrid BitGrid::from_binary(const BinaryMap& m) {
  BitGrid g(m.width, m.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x)
      if (m.at(x, y)) g.set(x, y);
  return g;
}

std::vector<Cell> line_cells(Cell a, Cell b) {
  std::vector<Cell> out;
  int dx = std::abs(b.x - a.x), dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  Cell c = a;
  out.reserve(static_cast<std::size_t>(std::max(dx, -dy)) + 1);
  while (true) {
    out.push_back(c);
    if (c.x == b.x && c.y == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      c.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      c.y += sy;
    }
  }
  return out;
}

}  // namespace marknav::grid
