#include <doctest.h>

#include <cmath>
#include <limits>

#include "marknav/mapping.hpp"
#include "support.hpp"

using namespace marknav;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

sim::RawScan make_raw(std::vector<double> ranges) {
  sim::RawScan s;
  s.ranges = std::move(ranges);
  return s;
}
}  // namespace

TEST_CASE("preprocess: midpoint interpolation") {
  const map::CleanScan c = map::preprocess_scan(make_raw({2.0, kNaN, 3.0}));
  CHECK(c.ranges == std::vector<double>{2.0, 2.5, 3.0});
}

TEST_CASE("preprocess: inf clamps to the ceiling") {
  const map::CleanScan c = map::preprocess_scan(make_raw({kInf, 1.0}));
  CHECK(c.ranges == std::vector<double>{3.5, 1.0});
}

TEST_CASE("preprocess: all-finite scans are unchanged, edge NaNs copy") {
  const map::CleanScan c = map::preprocess_scan(make_raw({1.0, 2.0, 3.0}));
  CHECK(c.ranges == std::vector<double>{1.0, 2.0, 3.0});
  const map::CleanScan e = map::preprocess_scan(make_raw({kNaN, kNaN, 2.0, kNaN}));
  CHECK(e.ranges == std::vector<double>{2.0, 2.0, 2.0, 2.0});
  CHECK_THROWS_AS(map::preprocess_scan(make_raw({kNaN, kNaN})), Error);
  CHECK_THROWS_AS(map::preprocess_scan(make_raw({})), Error);
}

TEST_CASE("preprocess keeps every value in (0, ceiling]") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> raw(100);
    bool any_finite = false;
    for (auto& r : raw) {
      const double u = rng.uniform();
      if (u < 0.1)
        r = kNaN;
      else if (u < 0.2)
        r = kInf;
      else if (u < 0.25)
        r = -0.5;
      else {
        r = rng.uniform(0.01, 6.0);
        any_finite = true;
      }
    }
    if (!any_finite) continue;
    const map::CleanScan c = map::preprocess_scan(make_raw(raw));
    for (double v : c.ranges) {
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
      CHECK(v <= 3.5);
    }
  }
}

TEST_CASE("raytrace_local: hand-traced single beam") {
  // One beam along +x at 0.25 m (5 cells): cells 1..4 free, endpoint at 5,
  // 8-neighbours of the endpoint marked 50.
  map::CleanScan scan;
  scan.ranges = {0.25, 0.25};
  scan.fov = 0.0;  // both beams exactly along +x
  const grid::OccupancyGrid local = map::raytrace_local(scan);
  const int ox = local.origin_x, oy = local.origin_y;
  for (int i = 1; i <= 4; ++i) CHECK(local.at(ox + i, oy) == 0);
  CHECK(local.at(ox + 5, oy) == 100);
  CHECK(local.at(ox + 6, oy) == 50);
  CHECK(local.at(ox + 5, oy + 1) == 50);
  CHECK(local.at(ox + 5, oy - 1) == 50);
  CHECK(local.at(ox + 6, oy + 1) == 50);
  // Far cells untouched.
  CHECK(local.at(ox + 20, oy + 20) == -1);
}

TEST_CASE("raytrace_local: ceiling beams mark no endpoint") {
  map::CleanScan scan;
  scan.ranges = {3.5, 3.5};
  scan.fov = 0.0;
  const grid::OccupancyGrid local = map::raytrace_local(scan);
  for (int x = 0; x < local.width; ++x)
    for (int y = 0; y < local.height; ++y) {
      CHECK(local.at(x, y) != 100);
      CHECK(local.at(x, y) != 50);
    }
}

TEST_CASE("fusion matches the odds product") {
  map::SensorModel model;
  model.p_hit = 0.9;
  map::GlobalMapper mapper(grid::OccupancyGrid(20, 20, 20.0, 10, 10), model);
  // Two observations of one endpoint cell at p = 0.9 from a 0.5 prior:
  // odds 9 * 9 = 81 -> p = 81/82.
  grid::OccupancyGrid local(3, 3, 20.0, 1, 1, -1);
  local.at(1, 1) = 100;
  mapper.fuse(local, {0, 0, 0});
  mapper.fuse(local, {0, 0, 0});
  CHECK(mapper.probability_at(10, 10) == doctest::Approx(81.0 / 82.0).epsilon(1e-12));
  CHECK(mapper.count_at(10, 10) == 2);
  CHECK(mapper.grid().at(10, 10) == 99);  // round(100 * 81/82)
}

TEST_CASE("neutral evidence leaves the probability unchanged") {
  map::SensorModel model;
  model.p_near = 0.5;
  map::GlobalMapper mapper(grid::OccupancyGrid(20, 20, 20.0, 10, 10), model);
  grid::OccupancyGrid hit(3, 3, 20.0, 1, 1, -1);
  hit.at(1, 1) = 100;
  mapper.fuse(hit, {0, 0, 0});
  const double before = mapper.probability_at(10, 10);
  grid::OccupancyGrid neutral(3, 3, 20.0, 1, 1, -1);
  neutral.at(1, 1) = 50;  // p_near = 0.5
  mapper.fuse(neutral, {0, 0, 0});
  CHECK(mapper.probability_at(10, 10) == doctest::Approx(before).epsilon(1e-15));
  CHECK(mapper.count_at(10, 10) == 2);
}

TEST_CASE("fusion commutes over scan order") {
  const world::WorldModel w = testsup::make_room(120, 80);
  sim::LaserSpec spec;
  spec.beam_count = 181;
  const std::vector<geo::Pose2D> poses = {
      {1.0, 1.0, 0.2}, {2.0, 2.0, -0.7}, {4.0, 3.0, 2.2}, {3.0, 1.5, 1.1}};
  std::vector<grid::OccupancyGrid> locals;
  for (const auto& p : poses) {
    const sim::RawScan raw = sim::simulate_scan(w, p, spec, std::uint64_t{4});
    locals.push_back(map::raytrace_local(map::preprocess_scan(raw)));
  }
  map::GlobalMapper ab{grid::OccupancyGrid(), map::SensorModel(), false};
  map::GlobalMapper ba{grid::OccupancyGrid(), map::SensorModel(), false};
  for (std::size_t i = 0; i < poses.size(); ++i) ab.fuse(locals[i], poses[i]);
  for (std::size_t i = poses.size(); i-- > 0;) ba.fuse(locals[i], poses[i]);
  REQUIRE(ab.log_odds().size() == ba.log_odds().size());
  double max_diff = 0;
  for (std::size_t i = 0; i < ab.log_odds().size(); ++i)
    max_diff = std::max(max_diff, std::abs(ab.log_odds()[i] - ba.log_odds()[i]));
  CHECK(max_diff < 1e-12);
  CHECK(ab.grid().cells == ba.grid().cells);
  CHECK(ab.counts() == ba.counts());
}

TEST_CASE("cell domain invariant holds after fusion") {
  const world::WorldModel w = testsup::make_room(60, 60);
  sim::LaserSpec spec;
  spec.beam_count = 91;
  spec.noise_sigma = 0.05;
  map::GlobalMapper mapper{grid::OccupancyGrid(), map::SensorModel(), false};
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    const geo::Pose2D p{rng.uniform(0.5, 2.5), rng.uniform(0.5, 2.5), rng.uniform(-3, 3)};
    const sim::RawScan raw = sim::simulate_scan(w, p, spec, rng);
    mapper.fuse(map::raytrace_local(map::preprocess_scan(raw)), p);
  }
  for (std::size_t i = 0; i < mapper.grid().cells.size(); ++i) {
    const std::int8_t v = mapper.grid().cells[i];
    CHECK(v >= -1);
    CHECK(v <= 100);
    CHECK((mapper.counts()[i] == 0) == (v == -1));
  }
}

TEST_CASE("out-of-bounds fusion errors by default and grows when enabled") {
  map::GlobalMapper strict{grid::OccupancyGrid(10, 10, 20.0, 5, 5), map::SensorModel(), false};
  grid::OccupancyGrid local(3, 3, 20.0, 1, 1, -1);
  local.at(1, 1) = 100;
  CHECK_THROWS_AS(strict.fuse(local, {5.0, 0.0, 0.0}), Error);

  map::GlobalMapper growing{grid::OccupancyGrid(10, 10, 20.0, 5, 5), map::SensorModel(), true};
  growing.fuse(local, {5.0, 0.0, 0.0});
  CHECK(growing.grid().width > 10);
  const int cx = growing.grid().world_to_cell_x(5.0);
  const int cy = growing.grid().world_to_cell_y(0.0);
  CHECK(growing.grid().at(cx, cy) == 70);
}

TEST_CASE("binarize: inclusive threshold, unknown never occupied") {
  grid::OccupancyGrid g(4, 1, 20.0, 0, 0, -1);
  g.at(0, 0) = 50;
  g.at(1, 0) = 49;
  g.at(2, 0) = -1;
  g.at(3, 0) = 100;
  const grid::BinaryMap b = map::binarize(g, 50);
  CHECK(b.at(0, 0) == 1);
  CHECK(b.at(1, 0) == 0);
  CHECK(b.at(2, 0) == 0);
  CHECK(b.at(3, 0) == 1);
  const grid::BinaryMap free = map::known_free_mask(g, 50);
  CHECK(free.at(0, 0) == 0);
  CHECK(free.at(1, 0) == 1);
  CHECK(free.at(2, 0) == 0);
  CHECK(free.at(3, 0) == 0);
}

TEST_CASE("thinning reduces a thick wall to a single-pixel line") {
  grid::BinaryMap m(40, 20);
  for (int x = 5; x < 35; ++x)
    for (int y = 8; y < 11; ++y) m.at(x, y) = 1;  // 3 px thick wall
  const grid::BinaryMap t = map::thin(m);
  // Interior columns carry exactly one set pixel.
  for (int x = 7; x < 33; ++x) {
    int count = 0;
    for (int y = 0; y < 20; ++y) count += t.at(x, y);
    CHECK(count == 1);
  }
  // All-free map stays empty.
  const grid::BinaryMap empty = map::thin(grid::BinaryMap(10, 10));
  CHECK(empty.count() == 0);
}
