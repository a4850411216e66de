#include "marknav/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace marknav::io {

namespace {

std::array<std::int8_t, 256> build_reverse_map() {
  std::array<std::int8_t, 256> rev;
  rev.fill(-2);  // -2 marks unmapped
  for (int p = 0; p <= 100; ++p) rev[occ_to_pixel(static_cast<std::int8_t>(p))] =
      static_cast<std::int8_t>(p);
  rev[205] = -1;
  return rev;
}

std::filesystem::path sidecar_path(const std::filesystem::path& pgm_path) {
  std::filesystem::path p = pgm_path;
  p.replace_extension(".txt");
  return p;
}

void skip_pgm_junk(std::istream& in) {
  // Whitespace and '#' comment lines between header tokens.
  while (true) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::uint8_t occ_to_pixel(std::int8_t v) {
  if (v < 0) return 205;
  return static_cast<std::uint8_t>(std::lround(254.0 - 2.54 * v));
}

std::int8_t pixel_to_occ(std::uint8_t pix) {
  static const std::array<std::int8_t, 256> rev = build_reverse_map();
  const std::int8_t v = rev[pix];
  if (v == -2) fail(Errc::io, "PGM pixel value " + std::to_string(pix) + " has no occupancy mapping");
  return v;
}

void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels,
               const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::io, "cannot open " + path.string() + " for writing");
  out << "P5\n";
  for (const std::string& c : comments) out << "# " << c << "\n";
  out << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) fail(Errc::io, "write failed: " + path.string());
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") fail(Errc::io, path.string() + ": not a binary PGM (P5)");
  PgmImage img;
  int maxval = 0;
  skip_pgm_junk(in);
  in >> img.width;
  skip_pgm_junk(in);
  in >> img.height;
  skip_pgm_junk(in);
  in >> maxval;
  if (!in || img.width <= 0 || img.height <= 0 || maxval != 255)
    fail(Errc::io, path.string() + ": unsupported PGM header");
  in.get();  // single whitespace after maxval
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!in) fail(Errc::io, path.string() + ": truncated pixel data");
  return img;
}

void write_grid(const grid::OccupancyGrid& g, const std::filesystem::path& pgm_path,
                int occupied_threshold, const std::vector<std::string>& header_lines) {
  std::vector<std::uint8_t> pixels(g.cells.size());
  // Internal rows are y-up; PGM stores the top row first.
  for (int y = 0; y < g.height; ++y) {
    const int src_y = g.height - 1 - y;
    for (int x = 0; x < g.width; ++x)
      pixels[static_cast<std::size_t>(y) * g.width + x] = occ_to_pixel(g.at(x, src_y));
  }
  write_pgm(pgm_path, g.width, g.height, pixels, header_lines);

  std::vector<std::pair<std::string, std::string>> kv = {
      {"resolution_cells_per_m", fmt_double(g.resolution)},
      {"origin_x_cells", std::to_string(g.origin_x)},
      {"origin_y_cells", std::to_string(g.origin_y)},
      {"occupied_threshold", std::to_string(occupied_threshold)},
  };
  write_keyvalue(sidecar_path(pgm_path), kv, header_lines);
}

GridFile read_grid(const std::filesystem::path& pgm_path) {
  const PgmImage img = read_pgm(pgm_path);
  GridFile gf;
  gf.sidecar = read_keyvalue(sidecar_path(pgm_path));
  const auto need = [&](const char* key) -> const std::string& {
    auto it = gf.sidecar.find(key);
    if (it == gf.sidecar.end())
      fail(Errc::io, sidecar_path(pgm_path).string() + ": missing key " + key);
    return it->second;
  };
  const double res = std::stod(need("resolution_cells_per_m"));
  const int ox = std::stoi(need("origin_x_cells"));
  const int oy = std::stoi(need("origin_y_cells"));
  if (auto it = gf.sidecar.find("occupied_threshold"); it != gf.sidecar.end())
    gf.occupied_threshold = std::stoi(it->second);
  gf.grid = grid::OccupancyGrid(img.width, img.height, res, ox, oy);
  for (int y = 0; y < img.height; ++y) {
    const int dst_y = img.height - 1 - y;
    for (int x = 0; x < img.width; ++x)
      gf.grid.at(x, dst_y) = pixel_to_occ(img.pixels[static_cast<std::size_t>(y) * img.width + x]);
  }
  return gf;
}

void write_markers_csv(const std::filesystem::path& path, const std::vector<geo::Marker>& markers,
                       const std::vector<std::string>& header_lines) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot open " + path.string() + " for writing");
  for (const std::string& h : header_lines) out << "# " << h << "\n";
  out << "id,x_m,y_m,theta_deg,size_cm,faces\n";
  for (const geo::Marker& m : markers) {
    out << m.id << "," << fmt_double(m.pose.x) << "," << fmt_double(m.pose.y) << ","
        << fmt_double(geo::rad2deg(m.pose.theta)) << "," << fmt_double(m.size_m * 100.0) << ","
        << m.faces << "\n";
  }
}

std::vector<geo::Marker> read_markers_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::vector<geo::Marker> out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_seen) {
      if (t.rfind("id,", 0) != 0) fail(Errc::io, path.string() + ": missing marker CSV header");
      header_seen = true;
      continue;
    }
    const auto f = split_csv_line(t);
    if (f.size() != 6) fail(Errc::io, path.string() + ": bad marker row: " + t);
    geo::Marker m;
    try {
      m.id = std::stoi(f[0]);
      m.pose.x = std::stod(f[1]);
      m.pose.y = std::stod(f[2]);
      m.pose.theta = geo::normalize_angle(geo::deg2rad(std::stod(f[3])));
      m.size_m = std::stod(f[4]) / 100.0;
      m.faces = std::stoi(f[5]);
    } catch (const std::exception&) {
      fail(Errc::io, path.string() + ": bad marker row: " + t);
    }
    out.push_back(m);
  }
  if (!header_seen) fail(Errc::io, path.string() + ": empty marker file");
  return out;
}

void write_keyvalue(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::vector<std::string>& comments) {
  std::ofstream out(path);
  if (!out) fail(Errc::io, "cannot open " + path.string() + " for writing");
  for (const std::string& c : comments) out << "# " << c << "\n";
  for (const auto& [k, v] : entries) out << k << " " << v << "\n";
}

std::map<std::string, std::string> read_keyvalue(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t sp = t.find_first_of(" \t");
    if (sp == std::string::npos) fail(Errc::io, path.string() + ": bad line: " + t);
    out[trim(t.substr(0, sp))] = trim(t.substr(sp + 1));
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace marknav::io
