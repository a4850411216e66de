#include "marknav/scenario.hpp"

#include <fstream>
#include <sstream>

#include "marknav/io.hpp"

namespace marknav::scenario {

namespace {

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(Errc::config, "[" + section + "] " + key + ": not a number: " + v);
  }
}

// "x,y,theta_deg" -> pose with theta in radians.
geo::Pose2D parse_pose(const std::string& section, const std::string& key,
                       const std::string& v) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : v) {
    if (c == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  if (parts.size() != 3) fail(Errc::config, "[" + section + "] " + key + ": expected x,y,theta_deg");
  return {to_double(section, key, trim(parts[0])), to_double(section, key, trim(parts[1])),
          geo::normalize_angle(geo::deg2rad(to_double(section, key, trim(parts[2]))))};
}

}  // namespace

std::map<std::string, std::map<std::string, std::string>> parse_ini(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open scenario file " + path.string());
  std::map<std::string, std::map<std::string, std::string>> out;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (const std::size_t hash = t.find_first_of("#;"); hash != std::string::npos)
      t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        fail(Errc::config, path.string() + ":" + std::to_string(lineno) + ": bad section header");
      section = trim(t.substr(1, t.size() - 2));
      out[section];
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      fail(Errc::config, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    out[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return out;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const auto ini = parse_ini(path);
  const std::filesystem::path base = path.parent_path();
  Scenario sc;

  const auto known_section = [&](const std::string& s) {
    return s == "world" || s == "laser" || s == "detection" || s == "controller" || s == "run";
  };
  for (const auto& [section, kv] : ini)
    if (!known_section(section)) fail(Errc::config, "unknown scenario section [" + section + "]");

  const auto get = [&](const std::string& section,
                       const std::string& key) -> std::optional<std::string> {
    auto sit = ini.find(section);
    if (sit == ini.end()) return std::nullopt;
    auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return std::nullopt;
    return kit->second;
  };
  const auto getd = [&](const std::string& section, const std::string& key, double dflt) {
    const auto v = get(section, key);
    return v ? to_double(section, key, *v) : dflt;
  };

  // Reject misspelled keys early.
  static const std::map<std::string, std::vector<std::string>> known_keys = {
      {"world", {"map", "markers"}},
      {"laser", {"fov_deg", "max_range_m", "beam_count", "noise_sigma_m", "nan_rate", "inf_rate"}},
      {"detection",
       {"camera_hfov_deg", "face_half_angle_deg", "persistence", "noise_tz_m", "noise_yaw_rad",
        "height_diff_m"}},
      {"controller",
       {"rate_hz", "lookahead_m", "v_max", "w_max", "goal_tolerance_m", "kp", "ki", "kd",
        "smoothing_window", "hysteresis_m", "dead_reckon_s", "align_tolerance_rad"}},
      {"run",
       {"seed", "out_dir", "waypoints", "src", "dst", "scan_period_s", "laps",
        "occupied_threshold"}},
  };
  for (const auto& [section, kv] : ini) {
    const auto& allowed = known_keys.at(section);
    for (const auto& [key, value] : kv) {
      (void)value;
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail(Errc::config, "unknown key '" + key + "' in section [" + section + "]");
    }
  }

  if (const auto v = get("world", "map")) sc.world_pgm = base / *v;
  if (const auto v = get("world", "markers")) sc.markers_csv = base / *v;

  sc.laser.fov = geo::deg2rad(getd("laser", "fov_deg", 240.0));
  sc.laser.max_range = getd("laser", "max_range_m", 3.5);
  sc.laser.beam_count = static_cast<int>(getd("laser", "beam_count", 683));
  sc.laser.noise_sigma = getd("laser", "noise_sigma_m", 0.0);
  sc.laser.nan_rate = getd("laser", "nan_rate", 0.0);
  sc.laser.inf_rate = getd("laser", "inf_rate", 0.0);

  sc.detection.camera_hfov = geo::deg2rad(getd("detection", "camera_hfov_deg", 82.0));
  sc.detection.face_half_angle = geo::deg2rad(getd("detection", "face_half_angle_deg", 80.0));
  sc.detection.persistence = getd("detection", "persistence", 1.0);
  sc.detection.noise_tz_m = getd("detection", "noise_tz_m", 0.0);
  sc.detection.noise_yaw_rad = getd("detection", "noise_yaw_rad", 0.0);
  sc.detection.height_diff_m = getd("detection", "height_diff_m", 2.0);

  sc.controller.rate_hz = getd("controller", "rate_hz", 30.0);
  sc.controller.pursuit.lookahead_m = getd("controller", "lookahead_m", 1.0);
  sc.controller.pursuit.v_max = getd("controller", "v_max", 0.3);
  sc.controller.pursuit.w_max = getd("controller", "w_max", 1.5);
  sc.controller.pursuit.goal_tolerance_m = getd("controller", "goal_tolerance_m", 0.05);
  sc.controller.kp = getd("controller", "kp", 0.7);
  sc.controller.ki = getd("controller", "ki", 0.0);
  sc.controller.kd = getd("controller", "kd", 0.0);
  sc.controller.smoothing_window =
      static_cast<std::size_t>(getd("controller", "smoothing_window", 5));
  sc.controller.hysteresis_m = getd("controller", "hysteresis_m", 0.20);
  sc.controller.dead_reckon_s = getd("controller", "dead_reckon_s", 1.0);
  sc.controller.align_tolerance_rad = getd("controller", "align_tolerance_rad", 0.02);

  sc.seed = static_cast<std::uint64_t>(getd("run", "seed", 0));
  if (const auto v = get("run", "out_dir")) sc.out_dir = base / *v;
  sc.scan_period_s = getd("run", "scan_period_s", 0.2);
  sc.laps = static_cast<int>(getd("run", "laps", 1));
  sc.occupied_threshold = static_cast<int>(getd("run", "occupied_threshold", 50));
  if (const auto v = get("run", "src")) sc.src = parse_pose("run", "src", *v);
  if (const auto v = get("run", "dst")) sc.dst = parse_pose("run", "dst", *v);
  if (const auto v = get("run", "waypoints")) {
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ';')) {
      const std::string t = trim(item);
      if (!t.empty()) sc.waypoints.push_back(parse_pose("run", "waypoints", t));
    }
  }
  return sc;
}

std::vector<std::string> Scenario::param_lines() const {
  std::vector<std::string> out;
  const auto add = [&](const std::string& k, const std::string& v) { out.push_back(k + "=" + v); };
  const auto addd = [&](const std::string& k, double v) { add(k, io::fmt_double(v)); };
  add("world.map", world_pgm.filename().string());
  add("world.markers", markers_csv.filename().string());
  addd("laser.fov_deg", geo::rad2deg(laser.fov));
  addd("laser.max_range_m", laser.max_range);
  add("laser.beam_count", std::to_string(laser.beam_count));
  addd("laser.noise_sigma_m", laser.noise_sigma);
  addd("laser.nan_rate", laser.nan_rate);
  addd("laser.inf_rate", laser.inf_rate);
  addd("detection.camera_hfov_deg", geo::rad2deg(detection.camera_hfov));
  addd("detection.face_half_angle_deg", geo::rad2deg(detection.face_half_angle));
  addd("detection.persistence", detection.persistence);
  addd("detection.noise_tz_m", detection.noise_tz_m);
  addd("detection.noise_yaw_rad", detection.noise_yaw_rad);
  addd("detection.height_diff_m", detection.height_diff_m);
  addd("controller.rate_hz", controller.rate_hz);
  addd("controller.lookahead_m", controller.pursuit.lookahead_m);
  addd("controller.v_max", controller.pursuit.v_max);
  addd("controller.w_max", controller.pursuit.w_max);
  addd("controller.goal_tolerance_m", controller.pursuit.goal_tolerance_m);
  addd("controller.kp", controller.kp);
  addd("controller.ki", controller.ki);
  addd("controller.kd", controller.kd);
  add("controller.smoothing_window", std::to_string(controller.smoothing_window));
  addd("controller.hysteresis_m", controller.hysteresis_m);
  addd("controller.dead_reckon_s", controller.dead_reckon_s);
  addd("controller.align_tolerance_rad", controller.align_tolerance_rad);
  add("run.seed", std::to_string(seed));
  addd("run.scan_period_s", scan_period_s);
  add("run.laps", std::to_string(laps));
  add("run.occupied_threshold", std::to_string(occupied_threshold));
  return out;
}

}  // namespace marknav::scenario
