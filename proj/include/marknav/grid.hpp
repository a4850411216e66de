#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "marknav/errors.hpp"
#include "marknav/kernels.hpp"

namespace marknav::grid {

// Discrete occupancy map. Cell values are -1 (unknown) or 0..100 (occupancy
// probability in percent). Row-major storage, y increasing upward; PGM I/O
// flips rows to the image convention. World origin sits at cell
// (origin_x, origin_y); cell (cx, cy) covers the square
// [(cx-origin_x)/res, (cx-origin_x+1)/res) x [...].
struct OccupancyGrid {
  int width = 1000;
  int height = 1000;
  double resolution = 20.0;  // cells per meter
  int origin_x = 500;
  int origin_y = 500;
  std::vector<std::int8_t> cells;

  OccupancyGrid() : cells(static_cast<std::size_t>(width) * height, -1) {}
  OccupancyGrid(int w, int h, double res, int ox, int oy, std::int8_t fill = -1)
      : width(w), height(h), resolution(res), origin_x(ox), origin_y(oy),
        cells(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0 || res <= 0) fail(Errc::config, "invalid grid dimensions");
  }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::int8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  std::int8_t& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }

  int world_to_cell_x(double x) const {
    return static_cast<int>(std::floor(x * resolution)) + origin_x;
  }
  int world_to_cell_y(double y) const {
    return static_cast<int>(std::floor(y * resolution)) + origin_y;
  }
  double cell_center_x(int cx) const { return (cx - origin_x + 0.5) / resolution; }
  double cell_center_y(int cy) const { return (cy - origin_y + 0.5) / resolution; }
};

// Binary raster: 1 = set (meaning depends on use: obstacle, free, skeleton).
struct BinaryMap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;

  BinaryMap() = default;
  BinaryMap(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), cells(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) fail(Errc::config, "invalid map dimensions");
  }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
  std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return cells[static_cast<std::size_t>(y) * width + x]; }
  bool set(int x, int y) const { return in_bounds(x, y) && at(x, y) != 0; }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto v : cells) c += (v != 0);
    return c;
  }
};

// Bitset over the cells of a fixed-size raster; backs coverage masks. Word
// operations run through the kernel layer.
class BitGrid {
 public:
  BitGrid() = default;
  BitGrid(int w, int h)
      : width_(w), height_(h), bits_(static_cast<std::size_t>(w) * h),
        words_((bits_ + 63) / 64, 0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size_bits() const { return bits_; }
  std::size_t size_words() const { return words_.size(); }
  const std::uint64_t* data() const { return words_.data(); }
  std::uint64_t* data() { return words_.data(); }

  bool get(int x, int y) const {
    const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
    return (words_[i >> 6] >> (i & 63)) & 1;
  }
  void set(int x, int y, bool v = true) {
    const std::size_t i = static_cast<std::size_t>(y) * width_ + x;
    if (v)
      words_[i >> 6] |= std::uint64_t{1} << (i & 63);
    else
      words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63));
  }

  std::size_t popcount() const { return kern::popcount(words_.data(), words_.size()); }
  void or_with(const BitGrid& o) { kern::or_inplace(words_.data(), o.words_.data(), words_.size()); }
  bool intersects(const BitGrid& o) const {
    return kern::intersects(words_.data(), o.words_.data(), words_.size());
  }
  bool contains(const BitGrid& sub) const {
    return kern::contains(words_.data(), sub.words_.data(), words_.size());
  }
  std::size_t popcount_and(const BitGrid& o) const {
    return kern::popcount_and(words_.data(), o.words_.data(), words_.size());
  }

  static BitGrid from_binary(const BinaryMap& m);

  bool operator==(const BitGrid& o) const {
    return width_ == o.width_ && height_ == o.height_ && words_ == o.words_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
  // Row-major ordering (y first) is the tie-break order used throughout.
  bool operator<(const Cell& o) const { return y != o.y ? y < o.y : x < o.x; }
};

// Integer line of cells from a to b inclusive (Bresenham). The traversal
// direction matters for tie cells, so callers must fix the endpoint order;
// coverage and line-of-sight checks always trace from the first argument.
std::vector<Cell> line_cells(Cell a, Cell b);

// Visit the cells of the line a->b excluding both endpoints; returns false if
// `blocked` returns true for any visited cell.
template <typename F>
bool line_of_sight(Cell a, Cell b, F&& blocked) {
  const std::vector<Cell> cells = line_cells(a, b);
  for (std::size_t i = 1; i + 1 < cells.size(); ++i)
    if (blocked(cells[i])) return false;
  return true;
}

}  // namespace marknav::grid
