// voxsc-shape: writes synthetic occupancy grids (.voxf or .binvox) for
// driving the main CLI without external assets.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "voxsc/voxsc.hpp"

namespace {

voxsc::Vec3 parse_vec3(const std::string& text) {
  voxsc::Vec3 v;
  const auto c1 = text.find(',');
  const auto c2 = c1 == std::string::npos ? std::string::npos : text.find(',', c1 + 1);
  if (c2 == std::string::npos) throw voxsc::ValidationError("expected \"x,y,z\"");
  try {
    v.x = std::stod(text.substr(0, c1));
    v.y = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    v.z = std::stod(text.substr(c2 + 1));
  } catch (...) {
    throw voxsc::ValidationError("expected \"x,y,z\"");
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxsc-shape: synthetic voxel grid generator"};
  std::string kind = "sphere", out, center = "0,0,0", half = "0.25,0.25,0.25";
  int dim = 32;
  double radius = 0.3;
  std::uint64_t seed = 0;
  app.add_option("--kind", kind, "sphere | box | blob")
      ->check(CLI::IsMember({"sphere", "box", "blob"}));
  app.add_option("--dim", dim, "grid resolution")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output file (.voxf or .binvox)")->required();
  app.add_option("--radius", radius, "sphere radius (world units)");
  app.add_option("--center", center, "shape center \"x,y,z\"");
  app.add_option("--half", half, "box half extents \"x,y,z\"");
  app.add_option("--seed", seed, "blob seed");
  CLI11_PARSE(app, argc, argv);

  try {
    voxsc::VoxelGrid grid;
    if (kind == "sphere") {
      grid = voxsc::sphere_grid(dim, parse_vec3(center), radius);
    } else if (kind == "box") {
      grid = voxsc::box_grid(dim, parse_vec3(center), parse_vec3(half));
    } else {
      voxsc::Rng rng(seed);
      grid = voxsc::random_blob_grid(dim, rng);
    }
    const bool binvox =
        out.size() >= 7 && out.compare(out.size() - 7, 7, ".binvox") == 0;
    voxsc::write_file(out, binvox ? voxsc::write_binvox(grid) : voxsc::write_voxf(grid));
    std::size_t occupied = 0;
    for (const double v : grid.values) occupied += v > 0.5;
    std::cout << "{\"occupied\":" << occupied << ",\"total\":" << grid.values.size() << "}\n";
  } catch (const voxsc::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const voxsc::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
