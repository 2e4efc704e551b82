#pragma once

#include <algorithm>
#include <vector>

#include "voxsc/math.hpp"
#include "voxsc/voxel.hpp"

namespace voxsc {

/// Binary grid of a solid sphere: voxels whose centers lie inside.
inline VoxelGrid sphere_grid(int dim, const Vec3& center, double radius) {
  VoxelGrid g(dim);
  const double r2 = radius * radius;
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y)
      for (int z = 0; z < dim; ++z) {
        const Vec3 c{g.center(x), g.center(y), g.center(z)};
        if (dot(c - center, c - center) <= r2) g.at(x, y, z) = 1.0;
      }
  return g;
}

/// Binary grid of a solid axis-aligned box.
inline VoxelGrid box_grid(int dim, const Vec3& center, const Vec3& half_extents) {
  VoxelGrid g(dim);
  for (int x = 0; x < dim; ++x)
    for (int y = 0; y < dim; ++y)
      for (int z = 0; z < dim; ++z) {
        const Vec3 c{g.center(x), g.center(y), g.center(z)};
        if (std::abs(c.x - center.x) <= half_extents.x &&
            std::abs(c.y - center.y) <= half_extents.y &&
            std::abs(c.z - center.z) <= half_extents.z)
          g.at(x, y, z) = 1.0;
      }
  return g;
}

/// Random blobby binary shape: a union of a few ellipsoids with jittered
/// centers and semi-axes. Asymmetric by construction, which keeps its
/// silhouettes pose-discriminative.
inline VoxelGrid random_blob_grid(int dim, Rng& rng, int min_parts = 3, int max_parts = 5) {
  VoxelGrid g(dim);
  const int parts =
      min_parts + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_parts - min_parts + 1)));
  for (int p = 0; p < parts; ++p) {
    const Vec3 center{rng.uniform(-0.18, 0.18), rng.uniform(-0.18, 0.18), rng.uniform(-0.18, 0.18)};
    const Vec3 axes{rng.uniform(0.08, 0.24), rng.uniform(0.08, 0.24), rng.uniform(0.08, 0.24)};
    for (int x = 0; x < dim; ++x)
      for (int y = 0; y < dim; ++y)
        for (int z = 0; z < dim; ++z) {
          const double dx = (g.center(x) - center.x) / axes.x;
          const double dy = (g.center(y) - center.y) / axes.y;
          const double dz = (g.center(z) - center.z) / axes.z;
          if (dx * dx + dy * dy + dz * dz <= 1.0) g.at(x, y, z) = 1.0;
        }
  }
  return g;
}

}  // namespace voxsc
