#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "voxsc/camera.hpp"
#include "voxsc/consistency.hpp"
#include "voxsc/errors.hpp"
#include "voxsc/voxel.hpp"

namespace voxsc {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// binvox: run-length-encoded binary grids.
// Voxels are streamed in this library's index order (x slowest, z fastest).

inline std::string write_binvox(const VoxelGrid& grid) {
  std::string out;
  out += "#binvox 1\n";
  out += "dim " + std::to_string(grid.dim) + " " + std::to_string(grid.dim) + " " +
         std::to_string(grid.dim) + "\n";
  out += "translate 0 0 0\nscale 1\ndata\n";
  std::size_t i = 0;
  const std::size_t n = grid.values.size();
  while (i < n) {
    const char value = grid.values[i] > 0.5 ? 1 : 0;
    std::size_t run = 1;
    while (i + run < n && run < 255 && (grid.values[i + run] > 0.5 ? 1 : 0) == value) ++run;
    out.push_back(value);
    out.push_back(static_cast<char>(run));
    i += run;
  }
  return out;
}

inline VoxelGrid read_binvox(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string token;
  if (!(in >> token) || token != "#binvox") throw IoError("binvox: missing #binvox magic");
  int version = -1;
  if (!(in >> version) || version != 1) throw IoError("binvox: unsupported version");
  int dx = -1, dy = -1, dz = -1;
  bool saw_data = false;
  while (in >> token) {
    if (token == "data") {
      saw_data = true;
      break;
    }
    if (token == "dim") {
      if (!(in >> dx >> dy >> dz)) throw IoError("binvox: malformed dim line");
    } else if (token == "translate") {
      double t;
      for (int i = 0; i < 3; ++i)
        if (!(in >> t)) throw IoError("binvox: malformed translate line");
    } else if (token == "scale") {
      double sc;
      if (!(in >> sc)) throw IoError("binvox: malformed scale line");
    } else {
      throw IoError("binvox: unrecognized header keyword '" + token + "'");
    }
  }
  if (!saw_data) throw IoError("binvox: missing data marker");
  if (dx < 1) throw IoError("binvox: missing dim line");
  if (dx != dy || dy != dz) throw IoError("binvox: non-cubic dims");

  std::size_t pos = static_cast<std::size_t>(in.tellg());
  if (pos < bytes.size() && bytes[pos] == '\n') ++pos;  // newline after "data"

  VoxelGrid grid(dx);
  const std::size_t n = grid.values.size();
  std::size_t filled = 0;
  while (filled < n) {
    if (pos + 1 >= bytes.size()) throw IoError("binvox: RLE underrun");
    const unsigned char value = static_cast<unsigned char>(bytes[pos]);
    const unsigned char count = static_cast<unsigned char>(bytes[pos + 1]);
    pos += 2;
    if (count == 0) throw IoError("binvox: zero run length");
    if (filled + count > n) throw IoError("binvox: RLE overrun");
    for (unsigned char c = 0; c < count; ++c) grid.values[filled++] = value ? 1.0 : 0.0;
  }
  return grid;
}

// ---------------------------------------------------------------------------
// voxf: real-valued grids. Fixed 9-byte ASCII header "voxf NNN\n" (dim
// zero-padded to 3 digits) followed by dim^3 little-endian 64-bit floats in
// index order.

inline std::string write_voxf(const VoxelGrid& grid) {
  char header[16];
  std::snprintf(header, sizeof(header), "voxf %03d\n", grid.dim);
  std::string out(header);
  out.resize(out.size() + grid.values.size() * sizeof(double));
  std::memcpy(out.data() + std::strlen(header), grid.values.data(),
              grid.values.size() * sizeof(double));
  return out;
}

inline VoxelGrid read_voxf(const std::string& bytes) {
  if (bytes.size() < 5 || bytes.compare(0, 5, "voxf ") != 0)
    throw IoError("voxf: missing magic");
  const std::size_t nl = bytes.find('\n', 5);
  if (nl == std::string::npos) throw IoError("voxf: malformed header");
  int dim = 0;
  try {
    dim = std::stoi(bytes.substr(5, nl - 5));
  } catch (...) {
    throw IoError("voxf: malformed dim");
  }
  if (dim < 1) throw IoError("voxf: bad dim");
  VoxelGrid grid(dim);
  const std::size_t expected = grid.values.size() * sizeof(double);
  const std::size_t have = bytes.size() - (nl + 1);
  if (have < expected) throw IoError("voxf: truncated payload");
  if (have > expected) throw IoError("voxf: trailing bytes");
  std::memcpy(grid.values.data(), bytes.data() + nl + 1, expected);
  for (const double v : grid.values)
    if (!(v >= 0.0 && v <= 1.0)) throw IoError("voxf: value out of [0,1]");
  return grid;
}

/// Reads a grid file by extension: .binvox or .voxf.
inline VoxelGrid read_grid_file(const std::string& path) {
  const std::string bytes = read_file(path);
  if (path.size() >= 7 && path.compare(path.size() - 7, 7, ".binvox") == 0)
    return read_binvox(bytes);
  return read_voxf(bytes);
}

// ---------------------------------------------------------------------------
// PGM (P5, maxval 255) masks; value = pixel / 255.

namespace detail {

/// Next whitespace-delimited token, skipping '#' comment lines.
inline std::string pgm_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

}  // namespace detail

inline std::string write_mask_pgm(const Mask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) +
                    "\n255\n";
  out.reserve(out.size() + mask.values.size());
  for (const double v : mask.values)
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
  return out;
}

inline Mask read_mask_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  if (detail::pgm_token(bytes, pos) != "P5") throw IoError("pgm: not a P5 file");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(detail::pgm_token(bytes, pos));
    height = std::stoi(detail::pgm_token(bytes, pos));
    maxval = std::stoi(detail::pgm_token(bytes, pos));
  } catch (...) {
    throw IoError("pgm: malformed header");
  }
  if (width < 1 || height < 1) throw IoError("pgm: bad dimensions");
  if (maxval != 255) throw IoError("pgm: maxval must be 255");
  ++pos;  // single whitespace byte after maxval
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (bytes.size() - pos < n) throw IoError("pgm: truncated pixel data");
  Mask mask(height, width);
  for (std::size_t i = 0; i < n; ++i)
    mask.values[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
  return mask;
}

// ---------------------------------------------------------------------------
// Pose and view-list JSON. Angles are degrees in files, radians in memory.

inline CameraPose pose_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("pose: expected a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "azimuth_deg" && key != "elevation_deg" && key != "translation")
      throw ValidationError("pose: unknown key: " + key);
  if (!j.contains("azimuth_deg") || !j.contains("elevation_deg"))
    throw ValidationError("pose: azimuth_deg and elevation_deg are required");
  CameraPose pose;
  pose.azimuth = wrap_angle(deg_to_rad(j.at("azimuth_deg").get<double>()));
  pose.elevation = deg_to_rad(j.at("elevation_deg").get<double>());
  if (pose.elevation < -kPi / 2.0 || pose.elevation > kPi / 2.0)
    throw ValidationError("pose: elevation_deg outside [-90, 90]");
  if (j.contains("translation")) {
    const auto& t = j.at("translation");
    if (!t.is_array() || t.size() != 3)
      throw ValidationError("pose: translation must be [x, y, z]");
    pose.translation = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
  }
  return pose;
}

inline nlohmann::json pose_to_json(const CameraPose& pose) {
  return {{"azimuth_deg", rad_to_deg(pose.azimuth)},
          {"elevation_deg", rad_to_deg(pose.elevation)},
          {"translation", {pose.translation.x, pose.translation.y, pose.translation.z}}};
}

struct ViewSpec {
  std::string mask_path;
  CameraPose pose;
};

/// View list file: JSON array of {"mask": path, "pose": {...}}.
inline std::vector<ViewSpec> read_view_list(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("view list: ") + e.what());
  }
  if (!j.is_array()) throw ValidationError("view list: expected a JSON array");
  std::vector<ViewSpec> views;
  for (const auto& entry : j) {
    if (!entry.is_object()) throw ValidationError("view list: entries must be objects");
    for (const auto& [key, _] : entry.items())
      if (key != "mask" && key != "pose")
        throw ValidationError("view list: unknown key: " + key);
    if (!entry.contains("mask") || !entry.contains("pose"))
      throw ValidationError("view list: each entry needs mask and pose");
    views.push_back({entry.at("mask").get<std::string>(), pose_from_json(entry.at("pose"))});
  }
  return views;
}

}  // namespace voxsc
