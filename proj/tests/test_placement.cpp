#include <doctest.h>

#include <algorithm>
#include <set>

#include "marknav/placement.hpp"
#include "support.hpp"

using namespace marknav;

namespace {

grid::BinaryMap free_rect(int w, int h) { return grid::BinaryMap(w, h, 1); }

// Exact set equality between the union of rectangles and the free cells.
bool union_equals_free(const std::vector<place::Rect>& rects, const grid::BinaryMap& free) {
  grid::BinaryMap covered(free.width, free.height);
  for (const place::Rect& r : rects)
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) {
        if (!free.in_bounds(x, y) || !free.at(x, y)) return false;  // rect leaves free space
        if (covered.at(x, y)) return false;                         // rects overlap
        covered.at(x, y) = 1;
      }
  return covered.cells == free.cells;
}

}  // namespace

TEST_CASE("decomposition: empty room is one rectangle") {
  const auto rects = place::rectangular_decomposition(free_rect(50, 30));
  REQUIRE(rects.size() == 1);
  CHECK(rects[0] == place::Rect{0, 0, 49, 29});
}

TEST_CASE("decomposition: L-shaped free space") {
  grid::BinaryMap m(40, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 20; ++x) m.at(x, y) = 1;  // tall left column
  for (int y = 0; y < 15; ++y)
    for (int x = 20; x < 40; ++x) m.at(x, y) = 1;  // low right arm
  const auto rects = place::rectangular_decomposition(m);
  CHECK(rects.size() == 2);
  CHECK(union_equals_free(rects, m));
}

TEST_CASE("decomposition: interior pillar is excluded exactly") {
  grid::BinaryMap m = free_rect(60, 40);
  for (int y = 15; y < 25; ++y)
    for (int x = 25; x < 35; ++x) m.at(x, y) = 0;
  const auto rects = place::rectangular_decomposition(m);
  CHECK(union_equals_free(rects, m));
  for (const place::Rect& r : rects)
    for (int y = r.y0; y <= r.y1; ++y)
      for (int x = r.x0; x <= r.x1; ++x) CHECK(m.at(x, y) == 1);
}

TEST_CASE("decomposition soundness on random orthogonal maps") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const world::WorldModel w = testsup::random_orthogonal_world(rng);
    grid::BinaryMap free(w.obstacles.width, w.obstacles.height);
    for (int y = 0; y < free.height; ++y)
      for (int x = 0; x < free.width; ++x) free.at(x, y) = w.obstacles.at(x, y) ? 0 : 1;
    const auto rects = place::rectangular_decomposition(free);
    CHECK(union_equals_free(rects, free));
  }
}

TEST_CASE("decomposition rejects non-binary input") {
  grid::BinaryMap m(4, 4);
  m.at(1, 1) = 7;
  CHECK_THROWS_AS(place::rectangular_decomposition(m), Error);
}

TEST_CASE("candidates: single room within range gives one centroid") {
  // 4 m x 4 m room at 20 cells/m = 80x80; range 4.25 m = 85 cells.
  const auto rects = place::rectangular_decomposition(free_rect(80, 80));
  const place::CandidateSet c = place::generate_candidates(rects, 85);
  REQUIRE(c.positions.size() == 1);
  CHECK(c.positions[0] == grid::Cell{39, 39});  // integer midpoint of 0..79
}

TEST_CASE("candidates: oversized room splits into a 3x3 grid") {
  // 10 m x 10 m = 200x200 cells; range 85 -> ceil(200/85) = 3 per axis.
  const auto rects = place::rectangular_decomposition(free_rect(200, 200));
  const place::CandidateSet c = place::generate_candidates(rects, 85);
  CHECK(c.positions.size() == 9);
  std::set<int> xs, ys;
  for (const auto& p : c.positions) {
    xs.insert(p.x);
    ys.insert(p.y);
  }
  CHECK(xs.size() == 3);
  CHECK(ys.size() == 3);
}

TEST_CASE("candidates: small alcove adds corners") {
  // 1 m x 1 m = 20x20 cells; 2*20 < 85 -> centroid + 4 corners.
  const auto rects = place::rectangular_decomposition(free_rect(20, 20));
  const place::CandidateSet c = place::generate_candidates(rects, 85);
  REQUIRE(c.positions.size() == 5);
  const std::set<grid::Cell> got(c.positions.begin(), c.positions.end());
  CHECK(got.count({9, 9}) == 1);    // centroid
  CHECK(got.count({0, 0}) == 1);
  CHECK(got.count({19, 0}) == 1);
  CHECK(got.count({0, 19}) == 1);
  CHECK(got.count({19, 19}) == 1);
  // 4 m room: corner rule must NOT trigger (80 >= 85/2).
  const auto rects2 = place::rectangular_decomposition(free_rect(80, 80));
  CHECK(place::generate_candidates(rects2, 85).positions.size() == 1);
}

TEST_CASE("coverage: open space is a discrete disk") {
  const grid::BinaryMap m = free_rect(101, 101);
  const place::CoverageMask mask = place::coverage_raytrace(m, {50, 50}, 30);
  std::size_t expect = 0;
  for (int y = 0; y < 101; ++y)
    for (int x = 0; x < 101; ++x) {
      const long long dx = x - 50, dy = y - 50;
      if (dx * dx + dy * dy <= 900) ++expect;
    }
  CHECK(mask.covered_count == expect);
}

TEST_CASE("coverage: brute-force visibility oracle near a wall") {
  grid::BinaryMap m = free_rect(80, 60);
  for (int y = 20; y < 40; ++y) m.at(40, y) = 0;  // thin wall segment
  const grid::Cell cand{30, 30};
  const int r = 25;
  const place::CoverageMask mask = place::coverage_raytrace(m, cand, r);
  // Independent check: fresh Bresenham implementation per cell.
  const auto visible = [&](grid::Cell to) {
    int x0 = cand.x, y0 = cand.y;
    const int dx = std::abs(to.x - x0), dy = -std::abs(to.y - y0);
    const int sx = x0 < to.x ? 1 : -1, sy = y0 < to.y ? 1 : -1;
    int err = dx + dy;
    while (!(x0 == to.x && y0 == to.y)) {
      const int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x0 += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y0 += sy;
      }
      if (x0 == to.x && y0 == to.y) break;
      if (!m.at(x0, y0)) return false;
    }
    return true;
  };
  std::size_t count = 0;
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 80; ++x) {
      if (!m.at(x, y)) continue;
      const long long ddx = x - cand.x, ddy = y - cand.y;
      const bool in = ddx * ddx + ddy * ddy <= static_cast<long long>(r) * r && visible({x, y});
      CHECK(mask.covered.get(x, y) == in);
      count += in;
    }
  CHECK(mask.covered_count == count);
  CHECK(mask.covered_count < place::coverage_raytrace(free_rect(80, 60), cand, r).covered_count);
}

TEST_CASE("coverage: centered marker beats wall-adjacent marker in a corridor") {
  // Long corridor: the candidate with more clearance covers at least as many
  // cells as one hugging the wall.
  const grid::BinaryMap corridor = free_rect(240, 43);
  const place::CoverageMask near_wall = place::coverage_raytrace(corridor, {120, 2}, 40);
  const place::CoverageMask centered = place::coverage_raytrace(corridor, {120, 21}, 40);
  CHECK(centered.covered_count >= near_wall.covered_count);
}

TEST_CASE("coverage rejects candidates on obstacles") {
  grid::BinaryMap m = free_rect(20, 20);
  m.at(5, 5) = 0;
  CHECK_THROWS_AS(place::coverage_raytrace(m, {5, 5}, 10), Error);
}

TEST_CASE("reduction: duplicate candidate is removed") {
  const grid::BinaryMap room = free_rect(60, 60);
  place::CandidateSet cands;
  cands.positions = {{30, 30}, {30, 30}, {10, 10}};
  // Positions dedupe happens in generate_candidates; feed duplicates directly
  // to confirm the reducer treats them as fully redundant.
  const place::ReductionResult res = place::reduce_markers(cands, room, 85);
  CHECK(res.kept.positions.size() == 1);
}

TEST_CASE("reduction: corridor triple reaches a minimum full cover") {
  // Three collinear candidates spaced r/2 in a corridor; brute force over all
  // subsets confirms the reducer lands on a minimum-cardinality full cover.
  grid::BinaryMap corridor = free_rect(120, 21);
  place::CandidateSet cands;
  cands.positions = {{20, 10}, {60, 10}, {100, 10}};
  const int r = 80;
  const place::ReductionResult res = place::reduce_markers(cands, corridor, r);

  const grid::BitGrid free_bits = grid::BitGrid::from_binary(corridor);
  std::vector<place::CoverageMask> masks;
  for (const auto& c : cands.positions)
    masks.push_back(place::coverage_raytrace(corridor, c, r));
  std::size_t best_size = 4;
  for (int mask = 1; mask < 8; ++mask) {
    grid::BitGrid uni(corridor.width, corridor.height);
    std::size_t n = 0;
    for (int i = 0; i < 3; ++i)
      if (mask & (1 << i)) {
        uni.or_with(masks[static_cast<std::size_t>(i)].covered);
        ++n;
      }
    if (uni.contains(free_bits)) best_size = std::min(best_size, n);
  }
  CHECK(res.kept.positions.size() == best_size);
}

TEST_CASE("reduction: single candidate is returned unchanged") {
  const grid::BinaryMap room = free_rect(40, 40);
  place::CandidateSet cands;
  cands.positions = {{20, 20}};
  const place::ReductionResult res = place::reduce_markers(cands, room, 60);
  CHECK(res.kept.positions == cands.positions);
}

TEST_CASE("reduction: incomplete initial coverage is an error naming cells") {
  const grid::BinaryMap room = free_rect(100, 100);
  place::CandidateSet cands;
  cands.positions = {{5, 5}};
  CHECK_THROWS_WITH_AS(place::reduce_markers(cands, room, 20),
                       doctest::Contains("uncovered"), Error);
}

TEST_CASE("reduction safety and local minimality on a structured map") {
  Rng rng(123);
  const world::WorldModel w = testsup::random_orthogonal_world(rng);
  grid::BinaryMap free(w.obstacles.width, w.obstacles.height);
  for (int y = 0; y < free.height; ++y)
    for (int x = 0; x < free.width; ++x) free.at(x, y) = w.obstacles.at(x, y) ? 0 : 1;
  const int r = 42;  // 2.1 m at 20 cells/m
  const auto rects = place::rectangular_decomposition(free);
  const auto cands = place::generate_candidates(rects, r);
  const place::ReductionResult res = place::reduce_markers(cands, free, r);

  const grid::BitGrid free_bits = grid::BitGrid::from_binary(free);
  grid::BitGrid uni(free.width, free.height);
  for (const auto& m : res.masks) uni.or_with(m.covered);
  CHECK(uni.contains(free_bits));  // coverage fraction exactly 1

  // No single kept marker is removable (brute force).
  for (std::size_t drop = 0; drop < res.masks.size(); ++drop) {
    grid::BitGrid rest(free.width, free.height);
    for (std::size_t j = 0; j < res.masks.size(); ++j)
      if (j != drop) rest.or_with(res.masks[j].covered);
    CHECK_FALSE(rest.contains(free_bits));
  }
}

TEST_CASE("reduced marker count is non-increasing in range on a fixed corridor") {
  const grid::BinaryMap corridor = free_rect(240, 43);
  std::size_t prev = std::numeric_limits<std::size_t>::max();
  for (const double range_m : {1.0, 2.0, 3.0, 4.25, 5.0, 6.0, 7.0}) {
    const int r = static_cast<int>(std::lround(range_m * 20));
    const auto rects = place::rectangular_decomposition(corridor);
    const auto cands = place::generate_candidates(rects, r);
    const place::ReductionResult res = place::reduce_markers(cands, corridor, r);
    CHECK(res.kept.positions.size() <= prev);
    prev = res.kept.positions.size();
  }
}

TEST_CASE("path point association: unique, tie-break, bisector") {
  const grid::BinaryMap corridor = free_rect(100, 21);
  place::CandidateSet markers;
  markers.positions = {{20, 10}, {80, 10}};
  std::vector<place::CoverageMask> masks;
  for (const auto& c : markers.positions)
    masks.push_back(place::coverage_raytrace(corridor, c, 70));

  // Point well inside only the left mask.
  CHECK(place::associate_path_points({{12, 10}}, markers, masks)[0] == 0);
  // Equidistant point: lower index wins.
  CHECK(place::associate_path_points({{50, 10}}, markers, masks)[0] == 0);
  // Association flips at the perpendicular bisector (within one cell).
  std::vector<grid::Cell> line;
  for (int x = 30; x <= 70; ++x) line.push_back({x, 10});
  const auto assoc = place::associate_path_points(line, markers, masks);
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i].x < 50) CHECK(assoc[i] == 0);
    if (line[i].x > 50) CHECK(assoc[i] == 1);
  }
  // Uncovered point errors.
  place::CandidateSet one;
  one.positions = {{20, 10}};
  std::vector<place::CoverageMask> small;
  small.push_back(place::coverage_raytrace(corridor, {20, 10}, 5));
  CHECK_THROWS_AS(place::associate_path_points({{90, 10}}, one, small), Error);
}
