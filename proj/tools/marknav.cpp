// marknav: deterministic 2D marker-navigation toolkit CLI.
//
// Subcommands drive the end-to-end pipeline: simulate a mapping pass (map),
// optimize marker placements (place), build the skeleton graph and plan
// (plan), run closed-loop navigation (navigate), score maps/trajectories
// (eval), and print the marker range model (range-table). Every command is
// deterministic given its inputs and seed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "marknav/eval.hpp"
#include "marknav/io.hpp"
#include "marknav/kernels.hpp"
#include "marknav/placement.hpp"
#include "marknav/planner.hpp"
#include "marknav/runner.hpp"
#include "marknav/scenario.hpp"
#include "marknav/world.hpp"

namespace fs = std::filesystem;
using namespace marknav;

namespace {

geo::Pose2D parse_pose_arg(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) fail(Errc::config, "pose must be x,y,theta_deg: " + s);
  return {v[0], v[1], geo::normalize_angle(geo::deg2rad(v[2]))};
}

std::vector<std::string> seed_header(std::uint64_t seed, const std::vector<std::string>& params) {
  std::vector<std::string> out;
  out.push_back("seed=" + std::to_string(seed));
  for (const std::string& p : params) out.push_back(p);
  return out;
}

int cmd_map(const fs::path& scenario_path, bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  const scenario::Scenario sc = scenario::load_scenario(scenario_path);
  const world::WorldModel w = world::load_world(sc.world_pgm, sc.markers_csv);
  fs::create_directories(sc.out_dir);

  const run::MappingRunResult res = run::run_mapping(w, sc);
  const auto hdr = seed_header(sc.seed, sc.param_lines());
  io::write_grid(res.mapper.grid(), sc.out_dir / "map.pgm", sc.occupied_threshold, hdr);
  run::write_trajectory_csv(sc.out_dir / "trajectory.csv", res.log, hdr);
  run::write_trajectory_csv(sc.out_dir / "trajectory_truth.csv", res.truth_log, hdr);
  {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"scans_fused", std::to_string(res.scans_fused)},
        {"sim_time_s", io::fmt_double(res.sim_time_s)},
    };
    io::write_keyvalue(sc.out_dir / "run_info.txt", kv, hdr);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "map: fused " << res.scans_fused << " scans over " << io::fmt_double(res.sim_time_s)
            << " s simulated; outputs in " << sc.out_dir.string() << "\n";
  if (timing) std::cout << "wall_clock_s " << wall << "\n";
  return 0;
}

int cmd_place(const fs::path& map_path, const std::vector<double>& ranges_m,
              const std::vector<int>& sizes_cm, const fs::path& out_dir, int threshold,
              std::uint64_t seed) {
  fs::create_directories(out_dir);
  const io::GridFile gf = io::read_grid(map_path);
  const grid::BinaryMap traversable = map::known_free_mask(gf.grid, threshold);
  const sim::DetectionSpec det;  // built-in range model

  std::vector<double> ranges = ranges_m;
  for (int size : sizes_cm) {
    auto it = det.ranges_by_size_cm.find(size);
    if (it == det.ranges_by_size_cm.end())
      fail(Errc::config, "no range model for size " + std::to_string(size) + " cm");
    ranges.push_back(it->second.tracking_m);
  }
  if (ranges.empty()) fail(Errc::config, "place needs --ranges or --sizes");

  std::vector<std::string> params = {"map=" + map_path.filename().string(),
                                     "occupied_threshold=" + std::to_string(threshold)};
  const auto hdr = seed_header(seed, params);

  std::ofstream curve(out_dir / "curve.csv");
  for (const std::string& h : hdr) curve << "# " << h << "\n";
  curve << "range_m,range_cells,marker_count\n";

  for (const double r_m : ranges) {
    const int r_cells = static_cast<int>(std::lround(r_m * gf.grid.resolution));
    const auto rects = place::rectangular_decomposition(traversable);
    const place::CandidateSet cands = place::generate_candidates(rects, r_cells);
    const place::ReductionResult red = place::reduce_markers(cands, traversable, r_cells);

    // Smallest modeled size whose tracking range reaches r_m.
    int size_cm = det.ranges_by_size_cm.rbegin()->first;
    for (const auto& [size, entry] : det.ranges_by_size_cm)
      if (entry.tracking_m >= r_m - 1e-9) {
        size_cm = size;
        break;
      }
    std::vector<geo::Marker> markers;
    for (std::size_t i = 0; i < red.kept.positions.size(); ++i) {
      geo::Marker m;
      m.id = static_cast<int>(i);
      m.pose = {(red.kept.positions[i].x - gf.grid.origin_x + 0.5) / gf.grid.resolution,
                (red.kept.positions[i].y - gf.grid.origin_y + 0.5) / gf.grid.resolution, 0.0};
      m.size_m = size_cm / 100.0;
      m.faces = 4;
      markers.push_back(m);
    }
    const std::string tag = io::fmt_double(r_m);
    io::write_markers_csv(out_dir / ("markers_r" + tag + ".csv"), markers, hdr);

    std::ofstream rep(out_dir / ("coverage_r" + tag + ".txt"));
    for (const std::string& h : hdr) rep << "# " << h << "\n";
    rep << "range_m " << tag << "\n";
    rep << "range_cells " << r_cells << "\n";
    rep << "total_free_cells " << red.free_cells << "\n";
    rep << "initial_candidates " << red.initial_candidates << "\n";
    rep << "kept_markers " << red.kept.positions.size() << "\n";
    rep << "marker covered_cells\n";
    for (std::size_t i = 0; i < red.masks.size(); ++i)
      rep << i << " " << red.masks[i].covered_count << "\n";
    // Overlap histogram: how many free cells are covered by k markers.
    std::vector<int> per_cell(static_cast<std::size_t>(traversable.width) * traversable.height, 0);
    for (const auto& mask : red.masks)
      for (int y = 0; y < traversable.height; ++y)
        for (int x = 0; x < traversable.width; ++x)
          if (mask.covered.get(x, y))
            per_cell[static_cast<std::size_t>(y) * traversable.width + x]++;
    std::vector<std::size_t> hist(red.masks.size() + 1, 0);
    for (int y = 0; y < traversable.height; ++y)
      for (int x = 0; x < traversable.width; ++x)
        if (traversable.at(x, y))
          hist[static_cast<std::size_t>(per_cell[static_cast<std::size_t>(y) * traversable.width +
                                                 x])]++;
    rep << "overlap_histogram (k_markers cells)\n";
    for (std::size_t k = 0; k < hist.size(); ++k)
      if (hist[k]) rep << k << " " << hist[k] << "\n";

    curve << tag << "," << r_cells << "," << red.kept.positions.size() << "\n";
    std::cout << "place: range " << tag << " m -> " << red.kept.positions.size() << " markers ("
              << red.initial_candidates << " candidates)\n";
  }
  return 0;
}

int cmd_plan(const fs::path& map_path, const std::string& src_s, const std::string& dst_s,
             const fs::path& out_dir, int threshold, std::uint64_t seed) {
  fs::create_directories(out_dir);
  const io::GridFile gf = io::read_grid(map_path);
  const geo::Pose2D src = parse_pose_arg(src_s);
  const geo::Pose2D dst = parse_pose_arg(dst_s);

  const run::PlannerArtifacts art = run::build_planner(gf.grid, threshold);
  const auto hdr = seed_header(seed, {"map=" + map_path.filename().string(), "src=" + src_s,
                                      "dst=" + dst_s});

  std::ofstream skel(out_dir / "skeleton.csv");
  for (const std::string& h : hdr) skel << "# " << h << "\n";
  skel << "x_cell,y_cell\n";
  for (const grid::Cell& c : art.graph.nodes()) skel << c.x << "," << c.y << "\n";

  const plan::PlanOutcome outcome = plan::plan_path(art.graph, src, dst, &art.obstacles);
  if (!outcome.plan) {
    std::cerr << "error: no path between the requested endpoints\n";
    return static_cast<int>(Errc::no_path);
  }
  const plan::PathPlan& p = *outcome.plan;

  std::ofstream path_csv(out_dir / "path.csv");
  for (const std::string& h : hdr) path_csv << "# " << h << "\n";
  path_csv << "x_cell,y_cell,x_m,y_m,theta_rad\n";
  for (std::size_t i = 0; i < p.waypoints.size(); ++i) {
    const geo::Pose2D& wp = p.waypoints[i];
    path_csv << art.graph.world_to_cell_x(wp.x) << "," << art.graph.world_to_cell_y(wp.y) << ","
             << io::fmt_double(wp.x) << "," << io::fmt_double(wp.y) << ","
             << io::fmt_double(wp.theta) << "\n";
  }

  // Overlay: free space white, obstacles black, unknown gray, path mid-gray.
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(gf.grid.width) * gf.grid.height);
  for (int y = 0; y < gf.grid.height; ++y) {
    const int src_y = gf.grid.height - 1 - y;
    for (int x = 0; x < gf.grid.width; ++x) {
      const std::int8_t v = gf.grid.at(x, src_y);
      pixels[static_cast<std::size_t>(y) * gf.grid.width + x] =
          v < 0 ? 205 : (v >= threshold ? 0 : 254);
    }
  }
  for (const grid::Cell& c : p.cells) {
    const int img_y = gf.grid.height - 1 - c.y;
    pixels[static_cast<std::size_t>(img_y) * gf.grid.width + c.x] = 127;
  }
  io::write_pgm(out_dir / "overlay.pgm", gf.grid.width, gf.grid.height, pixels, hdr);

  std::cout << "plan: " << p.waypoints.size() << " waypoints, length "
            << io::fmt_double(p.length_m) << " m; outputs in " << out_dir.string() << "\n";
  return 0;
}

int cmd_navigate(const fs::path& scenario_path, bool timing) {
  const auto t0 = std::chrono::steady_clock::now();
  const scenario::Scenario sc = scenario::load_scenario(scenario_path);
  const world::WorldModel w = world::load_world(sc.world_pgm, sc.markers_csv);
  fs::create_directories(sc.out_dir);

  std::vector<geo::Pose2D> waypoints = sc.waypoints;
  if (waypoints.empty()) {
    if (!sc.src || !sc.dst)
      fail(Errc::config, "navigate needs run.waypoints or run.src and run.dst");
    const run::PlannerArtifacts art = run::build_planner(world::to_grid(w), sc.occupied_threshold);
    const plan::PlanOutcome outcome = plan::plan_path(art.graph, *sc.src, *sc.dst, &art.obstacles);
    if (!outcome.plan) {
      std::cerr << "error: no path between src and dst\n";
      return static_cast<int>(Errc::no_path);
    }
    waypoints = outcome.plan->waypoints;
    waypoints.push_back(*sc.dst);
  }

  const run::NavigationRunResult res = run::run_navigation(w, sc, waypoints);
  const auto hdr = seed_header(sc.seed, sc.param_lines());
  run::write_trajectory_csv(sc.out_dir / "trajectory.csv", res.log, hdr);
  run::write_trajectory_csv(sc.out_dir / "trajectory_truth.csv", res.truth_log, hdr);
  {
    std::vector<std::pair<std::string, std::string>> kv = {
        {"max_cross_track_m", io::fmt_double(res.max_cross_track_m)},
        {"sim_time_s", io::fmt_double(res.sim_time_s)},
        {"reached_goal", res.reached_goal ? "1" : "0"},
    };
    io::write_keyvalue(sc.out_dir / "navigation_report.txt", kv, hdr);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "navigate: max cross-track " << io::fmt_double(res.max_cross_track_m) << " m over "
            << io::fmt_double(res.sim_time_s) << " s simulated; outputs in "
            << sc.out_dir.string() << "\n";
  if (timing) std::cout << "wall_clock_s " << wall << "\n";
  return 0;
}

int cmd_eval(const fs::path& map_path, const fs::path& truth_path, const fs::path& traj_path,
             const fs::path& truth_traj_path, const fs::path& out_dir, const std::string& env_name,
             const std::string& method, bool timing) {
  fs::create_directories(out_dir);
  eval::EvalReport rep;
  rep.environment = env_name;
  rep.method = method;

  if (!map_path.empty()) {
    if (truth_path.empty()) fail(Errc::config, "eval --map needs --truth");
    const io::GridFile a = io::read_grid(map_path);
    const io::GridFile b = io::read_grid(truth_path);
    rep = eval::evaluate_maps(a.grid, b.grid, b.occupied_threshold);
    rep.environment = env_name;
    rep.method = method;
  }
  if (!traj_path.empty()) {
    if (truth_traj_path.empty()) fail(Errc::config, "eval --traj needs --truth-traj");
    const auto est = run::read_trajectory_csv(traj_path, "smoothed");
    const auto gt = run::read_trajectory_csv(truth_traj_path, "truth");
    eval::AteOptions opt;
    rep.ate_m = eval::ate(est, gt, opt);
    opt.align = false;
    rep.ate_unaligned_m = eval::ate(est, gt, opt);
  }

  std::ofstream txt(out_dir / "report.txt");
  txt << "metric environment method value\n";
  std::ofstream csv(out_dir / "report.csv");
  csv << "metric,environment,method,value\n";
  const auto emit = [&](const std::string& metric, double value) {
    txt << metric << " " << rep.environment << " " << rep.method << " " << io::fmt_double(value)
        << "\n";
    csv << metric << "," << rep.environment << "," << rep.method << "," << io::fmt_double(value)
        << "\n";
  };
  if (!map_path.empty()) {
    emit("adnn_cells", rep.adnn_cells);
    emit("adnn_cm", rep.adnn_cm);
    emit("rmse_cells", rep.rmse_cells);
    emit("icp_iterations", rep.icp_iterations);
    emit("icp_residual_cells", rep.icp_residual);
  }
  if (rep.ate_m) emit("ate_m", *rep.ate_m);
  if (rep.ate_unaligned_m) emit("ate_unaligned_m", *rep.ate_unaligned_m);
  if (timing) std::cout << "runtime_s " << rep.runtime_s << "\n";

  std::cout << "eval: report written to " << (out_dir / "report.txt").string() << "\n";
  return 0;
}

int cmd_range_table(bool as_csv) {
  const sim::DetectionSpec det;
  if (as_csv) {
    std::cout << "size_cm,tracking_m,cutoff_m\n";
    for (const auto& [size, e] : det.ranges_by_size_cm)
      std::cout << size << "," << io::fmt_double(e.tracking_m) << ","
                << io::fmt_double(e.cutoff_m) << "\n";
  } else {
    std::cout << "marker range model (size -> tracking / cutoff distance)\n";
    for (const auto& [size, e] : det.ranges_by_size_cm)
      std::cout << "  " << size << " cm   " << io::fmt_double(e.tracking_m) << " m   "
                << io::fmt_double(e.cutoff_m) << " m\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"marknav: deterministic 2D marker-based mapping and navigation toolkit"};
  app.require_subcommand(1);
  bool timing = false;
  app.add_flag("--timing", timing, "print wall-clock timing to stdout");

  std::string scenario_path;
  auto* map_cmd = app.add_subcommand("map", "run a scripted mapping pass from a scenario file");
  map_cmd->add_option("--scenario", scenario_path, "scenario .ini file")->required();

  std::string place_map;
  std::vector<double> place_ranges;
  std::vector<int> place_sizes;
  std::string place_out = "out";
  int place_threshold = 50;
  std::uint64_t place_seed = 0;
  auto* place_cmd = app.add_subcommand("place", "compute reduced marker placements for a map");
  place_cmd->add_option("--map", place_map, "occupancy grid PGM")->required();
  place_cmd->add_option("--ranges", place_ranges, "marker ranges in meters")->delimiter(',');
  place_cmd->add_option("--sizes", place_sizes, "marker sizes in cm (uses the range model)")
      ->delimiter(',');
  place_cmd->add_option("--out", place_out, "output directory");
  place_cmd->add_option("--threshold", place_threshold, "occupied threshold");
  place_cmd->add_option("--seed", place_seed, "seed recorded in outputs");

  std::string plan_map, plan_src, plan_dst;
  std::string plan_out = "out";
  int plan_threshold = 50;
  std::uint64_t plan_seed = 0;
  auto* plan_cmd = app.add_subcommand("plan", "build the skeleton graph and plan a path");
  plan_cmd->add_option("--map", plan_map, "occupancy grid PGM")->required();
  plan_cmd->add_option("--src", plan_src, "source pose x,y,theta_deg")->required();
  plan_cmd->add_option("--dst", plan_dst, "destination pose x,y,theta_deg")->required();
  plan_cmd->add_option("--out", plan_out, "output directory");
  plan_cmd->add_option("--threshold", plan_threshold, "occupied threshold");
  plan_cmd->add_option("--seed", plan_seed, "seed recorded in outputs");

  std::string nav_scenario;
  auto* nav_cmd = app.add_subcommand("navigate", "closed-loop navigation from a scenario file");
  nav_cmd->add_option("--scenario", nav_scenario, "scenario .ini file")->required();

  std::string eval_map, eval_truth, eval_traj, eval_truth_traj;
  std::string eval_out = "out";
  std::string eval_env = "synthetic", eval_method = "marknav";
  auto* eval_cmd = app.add_subcommand("eval", "score a map and/or trajectory against truth");
  eval_cmd->add_option("--map", eval_map, "evaluated grid PGM");
  eval_cmd->add_option("--truth", eval_truth, "ground-truth grid PGM");
  eval_cmd->add_option("--traj", eval_traj, "estimated trajectory CSV");
  eval_cmd->add_option("--truth-traj", eval_truth_traj, "ground-truth trajectory CSV");
  eval_cmd->add_option("--out", eval_out, "output directory");
  eval_cmd->add_option("--environment", eval_env, "environment label for the report");
  eval_cmd->add_option("--method", eval_method, "method label for the report");

  bool range_csv = false;
  auto* range_cmd = app.add_subcommand("range-table", "print the marker range model");
  range_cmd->add_flag("--csv", range_csv, "CSV output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (map_cmd->parsed()) return cmd_map(scenario_path, timing);
    if (place_cmd->parsed())
      return cmd_place(place_map, place_ranges, place_sizes, place_out, place_threshold,
                       place_seed);
    if (plan_cmd->parsed())
      return cmd_plan(plan_map, plan_src, plan_dst, plan_out, plan_threshold, plan_seed);
    if (nav_cmd->parsed()) return cmd_navigate(nav_scenario, timing);
    if (eval_cmd->parsed())
      return cmd_eval(eval_map, eval_truth, eval_traj, eval_truth_traj, eval_out, eval_env,
                      eval_method, timing);
    if (range_cmd->parsed()) return cmd_range_table(range_csv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return static_cast<int>(Errc::internal);
  }
  return 0;
}
