#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "voxsc/consistency.hpp"

namespace voxsc::oracle {

/// Central finite differences of a scalar function, one coordinate at a time.
inline std::vector<double> finite_diff(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff: h must be positive");
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("finite_diff: non-finite function value");
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

/// Stop/escape probabilities by direct nested products, quadratic on
/// purpose so it shares nothing with the recurrence it cross-checks.
inline std::pair<std::vector<double>, double> naive_ray_probs(
    std::span<const double> occupancies) {
  const std::size_t n = occupancies.size();
  std::vector<double> stops(n);
  for (std::size_t i = 0; i < n; ++i) {
    double prod = 1.0;
    for (std::size_t j = 0; j < i; ++j) prod *= 1.0 - occupancies[j];
    stops[i] = occupancies[i] * prod;
  }
  double escape = 1.0;
  for (std::size_t i = 0; i < n; ++i) escape *= 1.0 - occupancies[i];
  return {std::move(stops), escape};
}

/// Nearest-voxel ray march through a binary grid: true iff any of the
/// fine_steps uniformly spaced depth samples lands in an occupied voxel.
inline bool discrete_ray_cast(const VoxelGrid& grid, const CameraPose& pose,
                              const Intrinsics& k, double u, double v,
                              int fine_steps, const SamplingConfig& s) {
  const Mat3 rot = rotation_matrix(pose);
  const Vec3 dir = ray_direction(u, v, k);
  const int dim = grid.dim;
  for (int i = 1; i <= fine_steps; ++i) {
    const double depth =
        s.depth_min + (static_cast<double>(i) / fine_steps) * (s.depth_max - s.depth_min);
    const Vec3 w = rot * (dir * depth + pose.translation);
    const int x = static_cast<int>(std::lround((w.x + 0.5) * dim - 0.5));
    const int y = static_cast<int>(std::lround((w.y + 0.5) * dim - 0.5));
    const int z = static_cast<int>(std::lround((w.z + 0.5) * dim - 0.5));
    if (x < 0 || x >= dim || y < 0 || y >= dim || z < 0 || z >= dim) continue;
    if (grid.at(x, y, z) > 0.5) return true;
  }
  return false;
}

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_coordinate;
  long n_checked = 0;
  long n_skipped_near_boundary = 0;
};

struct GradCheckParams {
  int grid_dim = 8;
  int mask_dim = 16;
  int n_samples = 16;
  int n_triples = 8;
  double h = 1e-4;
  double grad_floor = 1e-6;  // voxel entries below this (both sides) are not compared
  std::uint64_t seed = 0;
  int threads = 1;
  double corrupt = 0.0;  // test hook: bias added to analytic gradients
  ConsistencyWeights weights;
  IouUnion mode = IouUnion::standard;
};

namespace detail {

/// True if nudging one pose angle by +-h makes any ray sample cross a
/// trilinear cell face. The loss is only piecewise smooth in the sample
/// positions, so finite differences across a face are meaningless; affected
/// poses are skipped rather than counted as failures.
inline bool pose_step_crosses_cell_face(const VoxelGrid& grid, const CameraPose& pose,
                                        const Intrinsics& k, const SamplingConfig& s,
                                        int mask_dim, bool azimuth, double h) {
  CameraPose lo = pose, hi = pose;
  (azimuth ? lo.azimuth : lo.elevation) -= h;
  (azimuth ? hi.azimuth : hi.elevation) += h;
  const Mat3 rot_lo = rotation_matrix(lo);
  const Mat3 rot_hi = rotation_matrix(hi);
  const double dim = static_cast<double>(grid.dim);
  const auto cell = [dim](double w) { return std::floor((w + 0.5) * dim - 0.5); };
  const auto in_band = [dim](double g) { return g >= -1.0 && g <= dim; };
  for (int row = 0; row < mask_dim; ++row) {
    for (int col = 0; col < mask_dim; ++col) {
      const Vec3 dir = ray_direction(col + 0.5, row + 0.5, k);
      for (int i = 1; i <= s.n_samples; ++i) {
        const Vec3 lc = dir * sample_depth(i, s) + pose.translation;
        const Vec3 a = rot_lo * lc;
        const Vec3 b = rot_hi * lc;
        const double gax = (a.x + 0.5) * dim - 0.5, gbx = (b.x + 0.5) * dim - 0.5;
        const double gay = (a.y + 0.5) * dim - 0.5, gby = (b.y + 0.5) * dim - 0.5;
        const double gaz = (a.z + 0.5) * dim - 0.5, gbz = (b.z + 0.5) * dim - 0.5;
        // crossings only matter where the interpolation can be nonzero
        const bool relevant = (in_band(gax) && in_band(gay) && in_band(gaz)) ||
                              (in_band(gbx) && in_band(gby) && in_band(gbz));
        if (!relevant) continue;
        if (std::floor(gax) != std::floor(gbx) || std::floor(gay) != std::floor(gby) ||
            std::floor(gaz) != std::floor(gbz))
          return true;
      }
    }
  }
  return false;
}

}  // namespace detail

/// Verifies the analytic self-consistency gradients against central finite
/// differences on random (grid, pose, mask) triples. Pose candidates whose
/// finite-difference step would cross an interpolation cell face are
/// redrawn and counted in n_skipped_near_boundary.
inline GradCheckReport gradcheck_self_consistency(const GradCheckParams& p) {
  GradCheckReport report;
  Rng rng(p.seed);
  const Intrinsics k = Intrinsics::for_image(p.mask_dim, p.mask_dim);
  const SamplingConfig s{p.n_samples, 0.0, 1.0};
  const std::size_t n_vox =
      static_cast<std::size_t>(p.grid_dim) * p.grid_dim * p.grid_dim;

  const auto note = [&report](double rel, const std::string& where) {
    if (rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_coordinate = where;
    }
    report.n_checked += 1;
  };

  for (int t = 0; t < p.n_triples; ++t) {
    VoxelGrid grid(p.grid_dim);
    for (auto& v : grid.values) v = rng.uniform();
    Mask mask(p.mask_dim, p.mask_dim);
    for (auto& v : mask.values) v = rng.uniform();

    CameraPose pose;
    bool pose_ok = false;
    for (int attempt = 0; attempt < 10000 && !pose_ok; ++attempt) {
      pose.azimuth = rng.uniform(-kPi, kPi);
      pose.elevation = rng.uniform(-kPi / 2.0, kPi / 2.0);
      pose_ok =
          !detail::pose_step_crosses_cell_face(grid, pose, k, s, p.mask_dim, true, p.h) &&
          !detail::pose_step_crosses_cell_face(grid, pose, k, s, p.mask_dim, false, p.h);
      if (!pose_ok) report.n_skipped_near_boundary += 1;
    }

    ScGradResult analytic =
        self_consistency_grad(grid, pose, mask, k, s, p.weights, p.mode, p.threads);
    if (p.corrupt != 0.0) {
      for (auto& g : analytic.grads.d_grid) g += p.corrupt;
      analytic.grads.d_azimuth += p.corrupt;
      analytic.grads.d_elevation += p.corrupt;
    }

    const std::string prefix = "triple" + std::to_string(t) + ":";

    VoxelGrid probe = grid;
    for (std::size_t i = 0; i < n_vox; ++i) {
      const double saved = probe.values[i];
      probe.values[i] = saved + p.h;
      const double fp =
          self_consistency_loss(probe, pose, mask, k, s, p.weights, p.mode, p.threads);
      probe.values[i] = saved - p.h;
      const double fm =
          self_consistency_loss(probe, pose, mask, k, s, p.weights, p.mode, p.threads);
      probe.values[i] = saved;
      const double fd = (fp - fm) / (2.0 * p.h);
      const double a = analytic.grads.d_grid[i];
      if (std::abs(a) <= p.grad_floor && std::abs(fd) <= p.grad_floor) continue;
      const double rel = std::abs(a - fd) / std::max(std::abs(a), std::abs(fd));
      note(rel, prefix + "voxel[" + std::to_string(i) + "]");
    }

    if (pose_ok) {
      for (int angle = 0; angle < 2; ++angle) {
        CameraPose hi = pose, lo = pose;
        (angle == 0 ? hi.azimuth : hi.elevation) += p.h;
        (angle == 0 ? lo.azimuth : lo.elevation) -= p.h;
        const double fp =
            self_consistency_loss(grid, hi, mask, k, s, p.weights, p.mode, p.threads);
        const double fm =
            self_consistency_loss(grid, lo, mask, k, s, p.weights, p.mode, p.threads);
        const double fd = (fp - fm) / (2.0 * p.h);
        const double a = angle == 0 ? analytic.grads.d_azimuth : analytic.grads.d_elevation;
        const double rel =
            std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), p.grad_floor});
        note(rel, prefix + (angle == 0 ? "azimuth" : "elevation"));
      }
    }
  }
  return report;
}

}  // namespace voxsc::oracle
