#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxsc/camera.hpp"
#include "voxsc/parallel.hpp"
#include "voxsc/voxel.hpp"

namespace voxsc {

/// HxW image with values in [0, 1], row-major.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Mask() = default;
  Mask(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
  double& at(int row, int col) { return values[static_cast<std::size_t>(row) * width + col]; }
};

/// Occupancies sampled along one camera ray together with the probabilities
/// of the ray stopping at each sample or traversing all of them.
struct RayProfile {
  std::vector<double> occupancies;
  std::vector<double> stop_probs;
  double escape_prob = 1.0;
};

/// Weights of the two terms of the self-consistency loss.
struct ConsistencyWeights {
  double alpha1 = 5.0;
  double alpha2 = 0.125;
};

/// Denominator of the soft-IoU ratio. standard uses sum(a + b - ab);
/// verbatim keeps the printed sum(a + b + ab) variant for comparison runs.
enum class IouUnion { standard, verbatim };

/// Loss gradients with respect to the grid values and the two pose angles.
struct GradBundle {
  std::vector<double> d_grid;
  double d_azimuth = 0.0;
  double d_elevation = 0.0;
};

/// Stop probabilities from a sequence of occupancies:
/// stop[i] = occ[i] * prod_{j<i}(1 - occ[j]). Returns the escape
/// probability prod_i(1 - occ[i]), i.e. the leftover transmittance.
inline double stop_probabilities(std::span<const double> occupancies,
                                 std::span<double> stop_out) {
  double transmittance = 1.0;
  for (std::size_t i = 0; i < occupancies.size(); ++i) {
    stop_out[i] = occupancies[i] * transmittance;
    transmittance *= 1.0 - occupancies[i];
  }
  return transmittance;
}

namespace detail {

inline std::vector<double> make_depths(const SamplingConfig& s) {
  std::vector<double> d(static_cast<std::size_t>(s.n_samples));
  for (int i = 1; i <= s.n_samples; ++i) d[static_cast<std::size_t>(i - 1)] = sample_depth(i, s);
  return d;
}

/// Walks one ray and accumulates the stop-probability sum and the escape
/// probability, without materializing the per-sample vectors.
inline void ray_walk(const VoxelGrid& grid, const Mat3& rot, const Vec3& translation,
                     const Vec3& dir, std::span<const double> depths,
                     double& stop_sum, double& escape) {
  double transmittance = 1.0;
  double sum = 0.0;
  for (const double d : depths) {
    const Vec3 world = rot * (dir * d + translation);
    const double occ = trilinear_sample(grid, world);
    sum += occ * transmittance;
    transmittance *= 1.0 - occ;
  }
  stop_sum = sum;
  escape = transmittance;
}

inline void check_same_dims(const Mask& a, const Mask& b, const char* what) {
  if (a.height != b.height || a.width != b.width)
    throw std::invalid_argument(std::string(what) + ": mask dims differ");
}

}  // namespace detail

/// Samples the ray through image location (u, v) and evaluates the
/// stop/escape probabilities of its occupancy sequence.
inline RayProfile ray_profile(const VoxelGrid& grid, const CameraPose& pose,
                              const Intrinsics& k, double u, double v,
                              const SamplingConfig& s) {
  RayProfile p;
  const std::size_t n = static_cast<std::size_t>(s.n_samples);
  p.occupancies.resize(n);
  p.stop_probs.resize(n);
  const Mat3 rot = rotation_matrix(pose);
  const Vec3 dir = ray_direction(u, v, k);
  for (int i = 1; i <= s.n_samples; ++i) {
    const Vec3 world = rot * (dir * sample_depth(i, s) + pose.translation);
    p.occupancies[static_cast<std::size_t>(i - 1)] = trilinear_sample(grid, world);
  }
  p.escape_prob = stop_probabilities(p.occupancies, p.stop_probs);
  return p;
}

/// Per-pixel ray consistency: m * P(escape) + (1 - m) * P(stop anywhere).
inline double ray_loss(const RayProfile& profile, double m_uv) {
  double stop_sum = 0.0;
  for (const double q : profile.stop_probs) stop_sum += q;
  return m_uv * profile.escape_prob + (1.0 - m_uv) * stop_sum;
}

/// Mean of the per-pixel ray loss over every pixel of the mask.
inline double ray_consistency_loss(const VoxelGrid& grid, const CameraPose& pose,
                                   const Mask& mask, const Intrinsics& k,
                                   const SamplingConfig& s, int threads = 1) {
  const int h = mask.height, w = mask.width;
  const Mat3 rot = rotation_matrix(pose);
  const std::vector<double> depths = detail::make_depths(s);
  std::vector<double> row_sum(static_cast<std::size_t>(h), 0.0);
  parallel_rows(h, threads, [&](int row) {
    const double vc = row + 0.5;
    double acc = 0.0;
    for (int col = 0; col < w; ++col) {
      const Vec3 dir = ray_direction(col + 0.5, vc, k);
      double stop_sum, escape;
      detail::ray_walk(grid, rot, pose.translation, dir, depths, stop_sum, escape);
      const double m = mask.at(row, col);
      acc += m * escape + (1.0 - m) * stop_sum;
    }
    row_sum[static_cast<std::size_t>(row)] = acc;
  });
  double total = 0.0;
  for (const double r : row_sum) total += r;
  return total / (static_cast<double>(h) * w);
}

/// Differentiable silhouette: pixel value = 1 - escape probability.
inline Mask project(const VoxelGrid& grid, const CameraPose& pose, const Intrinsics& k,
                    int height, int width, const SamplingConfig& s, int threads = 1) {
  Mask out(height, width);
  const Mat3 rot = rotation_matrix(pose);
  const std::vector<double> depths = detail::make_depths(s);
  parallel_rows(height, threads, [&](int row) {
    const double vc = row + 0.5;
    for (int col = 0; col < width; ++col) {
      const Vec3 dir = ray_direction(col + 0.5, vc, k);
      double stop_sum, escape;
      detail::ray_walk(grid, rot, pose.translation, dir, depths, stop_sum, escape);
      out.at(row, col) = 1.0 - escape;
    }
  });
  return out;
}

/// Soft-IoU penalty between a projection and a mask:
/// exp(1 - sum(p*m) / union) - 1, zero when the ratio is 1.
/// When both images are identically zero the ratio is taken to be 1.
inline double projection_loss(const Mask& projection, const Mask& mask,
                              IouUnion mode = IouUnion::standard) {
  detail::check_same_dims(projection, mask, "projection_loss");
  double inter = 0.0, uni = 0.0;
  for (std::size_t i = 0; i < projection.values.size(); ++i) {
    const double p = projection.values[i], m = mask.values[i];
    inter += p * m;
    uni += mode == IouUnion::standard ? p + m - p * m : p + m + p * m;
  }
  if (uni <= 0.0) return 0.0;
  return std::exp(1.0 - inter / uni) - 1.0;
}

/// alpha1 * ray consistency + alpha2 * projection loss, sharing one pass
/// over the rays.
inline double self_consistency_loss(const VoxelGrid& grid, const CameraPose& pose,
                                    const Mask& mask, const Intrinsics& k,
                                    const SamplingConfig& s, const ConsistencyWeights& w,
                                    IouUnion mode = IouUnion::standard, int threads = 1) {
  const int h = mask.height, wd = mask.width;
  const Mat3 rot = rotation_matrix(pose);
  const std::vector<double> depths = detail::make_depths(s);
  std::vector<double> row_ray(static_cast<std::size_t>(h), 0.0);
  std::vector<double> row_inter(static_cast<std::size_t>(h), 0.0);
  std::vector<double> row_union(static_cast<std::size_t>(h), 0.0);
  parallel_rows(h, threads, [&](int row) {
    const double vc = row + 0.5;
    double ray_acc = 0.0, inter_acc = 0.0, union_acc = 0.0;
    for (int col = 0; col < wd; ++col) {
      const Vec3 dir = ray_direction(col + 0.5, vc, k);
      double stop_sum, escape;
      detail::ray_walk(grid, rot, pose.translation, dir, depths, stop_sum, escape);
      const double m = mask.at(row, col);
      const double p = 1.0 - escape;
      ray_acc += m * escape + (1.0 - m) * stop_sum;
      inter_acc += p * m;
      union_acc += mode == IouUnion::standard ? p + m - p * m : p + m + p * m;
    }
    row_ray[static_cast<std::size_t>(row)] = ray_acc;
    row_inter[static_cast<std::size_t>(row)] = inter_acc;
    row_union[static_cast<std::size_t>(row)] = union_acc;
  });
  double ray_total = 0.0, inter = 0.0, uni = 0.0;
  for (int row = 0; row < h; ++row) {
    ray_total += row_ray[static_cast<std::size_t>(row)];
    inter += row_inter[static_cast<std::size_t>(row)];
    uni += row_union[static_cast<std::size_t>(row)];
  }
  const double l_ray = ray_total / (static_cast<double>(h) * wd);
  const double l_proj = uni > 0.0 ? std::exp(1.0 - inter / uni) - 1.0 : 0.0;
  return w.alpha1 * l_ray + w.alpha2 * l_proj;
}

struct ScGradResult {
  double loss = 0.0;
  GradBundle grads;
};

/// Which gradients a caller wants; skipping one side saves a lot of work in
/// the optimization loops.
struct GradRequest {
  bool grid = true;
  bool pose = true;
};

namespace detail {

struct GridContrib {
  std::int64_t index;
  double value;
};

}  // namespace detail

/// Loss of self_consistency_loss plus its analytic gradients.
///
/// Gradient accumulation is deterministic for any thread count: every ray
/// writes into its own row's buffer and rows are merged in row order, so the
/// floating-point reduction order never depends on scheduling.
inline ScGradResult self_consistency_grad(const VoxelGrid& grid, const CameraPose& pose,
                                          const Mask& mask, const Intrinsics& k,
                                          const SamplingConfig& s, const ConsistencyWeights& w,
                                          IouUnion mode = IouUnion::standard, int threads = 1,
                                          GradRequest request = {}) {
  const int h = mask.height, wd = mask.width;
  const int n = s.n_samples;
  const Mat3 rot = rotation_matrix(pose);
  const RotationGrad drot = rotation_matrix_grad(pose);
  const std::vector<double> depths = detail::make_depths(s);
  const double hw = static_cast<double>(h) * wd;

  // First pass: losses and the global soft-IoU sums the adjoints depend on.
  std::vector<double> row_ray(static_cast<std::size_t>(h), 0.0);
  std::vector<double> row_inter(static_cast<std::size_t>(h), 0.0);
  std::vector<double> row_union(static_cast<std::size_t>(h), 0.0);
  parallel_rows(h, threads, [&](int row) {
    const double vc = row + 0.5;
    double ray_acc = 0.0, inter_acc = 0.0, union_acc = 0.0;
    for (int col = 0; col < wd; ++col) {
      const Vec3 dir = ray_direction(col + 0.5, vc, k);
      double stop_sum, escape;
      detail::ray_walk(grid, rot, pose.translation, dir, depths, stop_sum, escape);
      const double m = mask.at(row, col);
      const double p = 1.0 - escape;
      ray_acc += m * escape + (1.0 - m) * stop_sum;
      inter_acc += p * m;
      union_acc += mode == IouUnion::standard ? p + m - p * m : p + m + p * m;
    }
    row_ray[static_cast<std::size_t>(row)] = ray_acc;
    row_inter[static_cast<std::size_t>(row)] = inter_acc;
    row_union[static_cast<std::size_t>(row)] = union_acc;
  });
  double ray_total = 0.0, inter = 0.0, uni = 0.0;
  for (int row = 0; row < h; ++row) {
    ray_total += row_ray[static_cast<std::size_t>(row)];
    inter += row_inter[static_cast<std::size_t>(row)];
    uni += row_union[static_cast<std::size_t>(row)];
  }
  const double l_ray = ray_total / hw;
  const bool union_positive = uni > 0.0;
  const double ratio = union_positive ? inter / uni : 1.0;
  const double l_proj = union_positive ? std::exp(1.0 - ratio) - 1.0 : 0.0;

  ScGradResult result;
  result.loss = w.alpha1 * l_ray + w.alpha2 * l_proj;

  // Common factor of d l_proj / d P(u,v); the per-pixel part is
  // -(m * uni - inter * dUnion/dP).
  const double proj_factor = union_positive ? std::exp(1.0 - ratio) / (uni * uni) : 0.0;

  // Second pass: reverse sweep through the stop-probability recurrence.
  // With prefix transmittance T_i = prod_{j<i}(1 - y_j) and adjoint A of the
  // running transmittance, each sample receives
  //   d/dy_i = (gq - A) * T_i,   A <- gq * y_i + A * (1 - y_i)
  // where gq is the shared stop-probability adjoint and A starts at the
  // escape adjoint.
  std::vector<double> row_daz(static_cast<std::size_t>(h), 0.0);
  std::vector<double> row_del(static_cast<std::size_t>(h), 0.0);
  std::vector<std::vector<detail::GridContrib>> row_contribs(static_cast<std::size_t>(h));
  parallel_rows(h, threads, [&](int row) {
    auto& contribs = row_contribs[static_cast<std::size_t>(row)];
    if (request.grid) contribs.reserve(static_cast<std::size_t>(wd) * n);
    std::vector<double> occ(static_cast<std::size_t>(n));
    std::vector<double> prefix(static_cast<std::size_t>(n));
    std::vector<TrilinearGrad> tg(static_cast<std::size_t>(n));
    std::vector<Vec3> cam_pts(request.pose ? static_cast<std::size_t>(n) : 0);
    const double vc = row + 0.5;
    double daz = 0.0, del = 0.0;
    for (int col = 0; col < wd; ++col) {
      const double m = mask.at(row, col);
      const Vec3 dir = ray_direction(col + 0.5, vc, k);
      double transmittance = 1.0;
      for (int i = 0; i < n; ++i) {
        const Vec3 lc = dir * depths[static_cast<std::size_t>(i)] + pose.translation;
        if (request.pose) cam_pts[static_cast<std::size_t>(i)] = lc;
        const double y = detail::trilinear_eval(grid, rot * lc, &tg[static_cast<std::size_t>(i)]);
        occ[static_cast<std::size_t>(i)] = y;
        prefix[static_cast<std::size_t>(i)] = transmittance;
        transmittance *= 1.0 - y;
      }
      double dlproj_dp = 0.0;
      if (union_positive) {
        const double dunion = mode == IouUnion::standard ? 1.0 - m : 1.0 + m;
        dlproj_dp = -proj_factor * (m * uni - inter * dunion);
      }
      // escape adjoint: ray term + projection term through P = 1 - escape
      const double ge = w.alpha1 * m / hw - w.alpha2 * dlproj_dp;
      const double gq = w.alpha1 * (1.0 - m) / hw;
      double a = ge;
      for (int i = n - 1; i >= 0; --i) {
        const double ybar = (gq - a) * prefix[static_cast<std::size_t>(i)];
        a = gq * occ[static_cast<std::size_t>(i)] + a * (1.0 - occ[static_cast<std::size_t>(i)]);
        if (ybar == 0.0) continue;
        const auto& g = tg[static_cast<std::size_t>(i)];
        if (request.grid) {
          for (const CornerWeight& c : g.corners)
            if (c.index >= 0 && c.weight != 0.0) contribs.push_back({c.index, ybar * c.weight});
        }
        if (request.pose) {
          const Vec3& lc = cam_pts[static_cast<std::size_t>(i)];
          daz += ybar * dot(g.d_point, drot.d_azimuth * lc);
          del += ybar * dot(g.d_point, drot.d_elevation * lc);
        }
      }
    }
    row_daz[static_cast<std::size_t>(row)] = daz;
    row_del[static_cast<std::size_t>(row)] = del;
  });

  if (request.grid) result.grads.d_grid.assign(grid.values.size(), 0.0);
  for (int row = 0; row < h; ++row) {
    result.grads.d_azimuth += row_daz[static_cast<std::size_t>(row)];
    result.grads.d_elevation += row_del[static_cast<std::size_t>(row)];
    if (request.grid)
      for (const auto& c : row_contribs[static_cast<std::size_t>(row)])
        result.grads.d_grid[static_cast<std::size_t>(c.index)] += c.value;
  }
  return result;
}

}  // namespace voxsc
