#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "marknav/geometry.hpp"
#include "marknav/grid.hpp"

namespace marknav::io {

// Occupancy value <-> PGM pixel mapping. Bit-exact round trip:
//   -1 -> 205, p in [0,100] -> round(254 - 2.54 p)  (0 -> 254, 100 -> 0).
std::uint8_t occ_to_pixel(std::int8_t v);
std::int8_t pixel_to_occ(std::uint8_t pix);  // throws io on unmapped pixel values

// Writes grid.pgm (binary P5) plus a plain-text sidecar <same stem>.txt with
// resolution, origin, threshold and the caller's header lines (seed, params).
void write_grid(const grid::OccupancyGrid& g, const std::filesystem::path& pgm_path,
                int occupied_threshold, const std::vector<std::string>& header_lines = {});

struct GridFile {
  grid::OccupancyGrid grid;
  int occupied_threshold = 50;
  std::map<std::string, std::string> sidecar;
};
GridFile read_grid(const std::filesystem::path& pgm_path);

// Bare P5 helpers (used for overlays and ground-truth bitmaps).
void write_pgm(const std::filesystem::path& path, int width, int height,
               const std::vector<std::uint8_t>& pixels,
               const std::vector<std::string>& comments = {});
struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};
PgmImage read_pgm(const std::filesystem::path& path);

// Marker list CSV: header "id,x_m,y_m,theta_deg,size_cm,faces".
void write_markers_csv(const std::filesystem::path& path, const std::vector<geo::Marker>& markers,
                       const std::vector<std::string>& header_lines = {});
std::vector<geo::Marker> read_markers_csv(const std::filesystem::path& path);

// Small key/value sidecar files ("key value" per line, '#' comments).
void write_keyvalue(const std::filesystem::path& path,
                    const std::vector<std::pair<std::string, std::string>>& entries,
                    const std::vector<std::string>& comments = {});
std::map<std::string, std::string> read_keyvalue(const std::filesystem::path& path);

// Deterministic float formatting for CSV output.
std::string fmt_double(double v);

}  // namespace marknav::io
