#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "voxsc/math.hpp"

namespace voxsc {

/// Cubic occupancy grid over the world cube [-0.5, 0.5]^3.
///
/// values are in [0, 1], laid out with x slowest and z fastest:
/// index = (x * dim + y) * dim + z. The voxel center of index i along an
/// axis sits at -0.5 + (i + 0.5) / dim.
struct VoxelGrid {
  int dim = 0;
  std::vector<double> values;

  VoxelGrid() = default;
  explicit VoxelGrid(int d, double fill = 0.0)
      : dim(d), values(static_cast<std::size_t>(d) * d * d, fill) {}

  static std::size_t index(int dim, int x, int y, int z) {
    return (static_cast<std::size_t>(x) * dim + y) * dim + z;
  }

  double at(int x, int y, int z) const { return values[index(dim, x, y, z)]; }
  double& at(int x, int y, int z) { return values[index(dim, x, y, z)]; }

  std::size_t size() const { return values.size(); }

  /// World coordinate of the voxel center along one axis.
  double center(int i) const { return -0.5 + (i + 0.5) / static_cast<double>(dim); }
};

/// One interpolation corner: flat voxel index and its weight. index is -1
/// for corners outside the grid (virtual zero padding, weight always 0).
struct CornerWeight {
  std::int64_t index = -1;
  double weight = 0.0;
};

struct TrilinearGrad {
  std::array<CornerWeight, 8> corners{};
  Vec3 d_point;  // derivative of the sample w.r.t. the world query point
};

namespace detail {

/// Shared kernel for trilinear sampling. Computes the interpolated value,
/// and optionally the eight corner weights and the spatial derivative.
inline double trilinear_eval(const VoxelGrid& grid, const Vec3& p, TrilinearGrad* grad) {
  const int dim = grid.dim;
  const double v = static_cast<double>(dim);
  // Continuous grid coordinate: integer values land on voxel centers.
  const double gx = (p.x + 0.5) * v - 0.5;
  const double gy = (p.y + 0.5) * v - 0.5;
  const double gz = (p.z + 0.5) * v - 0.5;
  const double fx0 = std::floor(gx), fy0 = std::floor(gy), fz0 = std::floor(gz);
  const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0), z0 = static_cast<int>(fz0);
  const double tx = gx - fx0, ty = gy - fy0, tz = gz - fz0;

  const double wx[2] = {1.0 - tx, tx};
  const double wy[2] = {1.0 - ty, ty};
  const double wz[2] = {1.0 - tz, tz};

  double corner_vals[8];
  double value = 0.0;
  for (int dx = 0; dx < 2; ++dx) {
    const int x = x0 + dx;
    const bool okx = x >= 0 && x < dim;
    for (int dy = 0; dy < 2; ++dy) {
      const int y = y0 + dy;
      const bool oky = y >= 0 && y < dim;
      for (int dz = 0; dz < 2; ++dz) {
        const int z = z0 + dz;
        const int c = dx * 4 + dy * 2 + dz;
        double cv = 0.0;
        std::int64_t flat = -1;
        if (okx && oky && z >= 0 && z < dim) {
          flat = static_cast<std::int64_t>(VoxelGrid::index(dim, x, y, z));
          cv = grid.values[static_cast<std::size_t>(flat)];
        }
        corner_vals[c] = cv;
        const double w = wx[dx] * wy[dy] * wz[dz];
        value += w * cv;
        if (grad) grad->corners[c] = {flat, flat >= 0 ? w : 0.0};
      }
    }
  }

  if (grad) {
    // d/dg of the interpolation, then chain through g = (p + 0.5) * dim - 0.5.
    double dgx = 0.0, dgy = 0.0, dgz = 0.0;
    for (int dy = 0; dy < 2; ++dy)
      for (int dz = 0; dz < 2; ++dz)
        dgx += (corner_vals[4 + dy * 2 + dz] - corner_vals[dy * 2 + dz]) * wy[dy] * wz[dz];
    for (int dx = 0; dx < 2; ++dx)
      for (int dz = 0; dz < 2; ++dz)
        dgy += (corner_vals[dx * 4 + 2 + dz] - corner_vals[dx * 4 + dz]) * wx[dx] * wz[dz];
    for (int dx = 0; dx < 2; ++dx)
      for (int dy = 0; dy < 2; ++dy)
        dgz += (corner_vals[dx * 4 + dy * 2 + 1] - corner_vals[dx * 4 + dy * 2]) * wx[dx] * wy[dy];
    grad->d_point = {dgx * v, dgy * v, dgz * v};
  }
  return value;
}

}  // namespace detail

/// Trilinear occupancy lookup at a world point. Points beyond the lattice of
/// voxel centers fall off linearly to 0 within one cell (virtual zero
/// padding) and read exactly 0 past that.
inline double trilinear_sample(const VoxelGrid& grid, const Vec3& point) {
  return detail::trilinear_eval(grid, point, nullptr);
}

/// Corner weights (d sample / d value) and spatial derivative of the sample.
inline TrilinearGrad trilinear_grad(const VoxelGrid& grid, const Vec3& point) {
  TrilinearGrad g;
  detail::trilinear_eval(grid, point, &g);
  return g;
}

/// Hard threshold: 1 where value >= threshold, else 0.
inline VoxelGrid binarize(const VoxelGrid& grid, double threshold) {
  VoxelGrid out(grid.dim);
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    out.values[i] = grid.values[i] >= threshold ? 1.0 : 0.0;
  return out;
}

/// Intersection over union of two binary grids. Both empty counts as 1.
inline double voxel_iou(const VoxelGrid& a, const VoxelGrid& b) {
  if (a.dim != b.dim) throw std::invalid_argument("voxel_iou: grid dims differ");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool va = a.values[i] > 0.5, vb = b.values[i] > 0.5;
    inter += va && vb;
    uni += va || vb;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace voxsc
