#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "voxsc/consistency.hpp"
#include "voxsc/math.hpp"

namespace voxsc {

struct OptimConfig {
  double step_size = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int max_iters = 300;
  double tol = 1e-8;  // minimum best-loss improvement still counted as progress
  std::uint64_t seed = 0;
};

/// First/second moment buffers of the adaptive-moment update.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t steps = 0;
};

/// One bias-corrected adaptive-moment step, in place. Empty state is
/// initialized to zeros on first use.
inline void moment_step(AdamState& state, std::span<double> params,
                        std::span<const double> grads, const OptimConfig& cfg) {
  if (params.size() != grads.size())
    throw std::invalid_argument("moment_step: params/grads size mismatch");
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size())
    throw std::invalid_argument("moment_step: state size mismatch");
  state.steps += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.steps));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.steps));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= cfg.step_size * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

struct PoseIterate {
  int iter = 0;
  double loss = 0.0;
  double azimuth = 0.0;
  double elevation = 0.0;
};

struct PoseEstimate {
  CameraPose pose;
  double final_loss = 0.0;
  std::vector<PoseIterate> trace;  // best-so-far records, loss non-increasing
};

struct LossIterate {
  int iter = 0;
  double loss = 0.0;
};

struct ReconstructionResult {
  VoxelGrid grid;
  double final_loss = 0.0;
  std::vector<LossIterate> trace;  // best-so-far records
};

struct ViewObservation {
  Mask mask;
  CameraPose pose;
};

namespace detail {

inline constexpr int kNoProgressPatience = 20;

// Logits live in [-kLogitLimit, kLogitLimit]. The corresponding occupancies
// stay strictly inside (0, 1) in double precision, and voxels driven to the
// rails are numerically frozen (sigmoid' ~ 1e-13) instead of clipped.
inline constexpr double kLogitLimit = 30.0;

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double logit(double v) {
  const double lo = sigmoid(-kLogitLimit), hi = sigmoid(kLogitLimit);
  const double c = std::clamp(v, lo, hi);
  return std::clamp(std::log(c / (1.0 - c)), -kLogitLimit, kLogitLimit);
}

inline void clamp_pose(CameraPose& pose) {
  pose.azimuth = wrap_angle(pose.azimuth);
  pose.elevation = std::clamp(pose.elevation, -kPi / 2.0, kPi / 2.0);
}

}  // namespace detail

/// Estimates azimuth/elevation by descending the self-consistency loss with
/// the grid held fixed. With restarts > 1, additional seeded random starts
/// are run and the best pose across all of them is kept; the trace records
/// the running best, so its loss column is non-increasing.
inline PoseEstimate estimate_pose(const VoxelGrid& grid, const Mask& mask,
                                  const CameraPose& init, const Intrinsics& k,
                                  const SamplingConfig& s, const ConsistencyWeights& w,
                                  const OptimConfig& cfg, int restarts = 1,
                                  IouUnion mode = IouUnion::standard, int threads = 1) {
  PoseEstimate best;
  best.final_loss = std::numeric_limits<double>::infinity();
  Rng rng(cfg.seed);
  int iter_id = 0;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    CameraPose pose = init;
    if (r > 0) {
      pose.azimuth = rng.uniform(-kPi, kPi);
      pose.elevation = rng.uniform(-kPi / 2.0, kPi / 2.0);
    }
    detail::clamp_pose(pose);
    AdamState adam;
    double restart_best = std::numeric_limits<double>::infinity();
    int last_progress = 0;
    for (int it = 0; it < cfg.max_iters; ++it) {
      const ScGradResult eval = self_consistency_grad(grid, pose, mask, k, s, w, mode, threads,
                                                      GradRequest{.grid = false, .pose = true});
      if (eval.loss < restart_best - cfg.tol) last_progress = it;
      restart_best = std::min(restart_best, eval.loss);
      if (eval.loss < best.final_loss) {
        best.final_loss = eval.loss;
        best.pose = pose;
      }
      best.trace.push_back({iter_id++, best.final_loss, best.pose.azimuth, best.pose.elevation});
      if (it - last_progress > detail::kNoProgressPatience) break;
      double angles[2] = {pose.azimuth, pose.elevation};
      const double grads[2] = {eval.grads.d_azimuth, eval.grads.d_elevation};
      moment_step(adam, angles, grads, cfg);
      pose.azimuth = angles[0];
      pose.elevation = angles[1];
      detail::clamp_pose(pose);
    }
  }
  return best;
}

/// Recovers an occupancy grid from silhouette observations by descending the
/// mean self-consistency loss over all views. The grid is parameterized by
/// free logits (values = sigmoid(logits)), which keeps every occupancy
/// strictly inside (0, 1) without clipping gradients.
inline ReconstructionResult reconstruct(const std::vector<ViewObservation>& observations,
                                        int grid_dim, const Intrinsics& k,
                                        const SamplingConfig& s, const ConsistencyWeights& w,
                                        const OptimConfig& cfg,
                                        IouUnion mode = IouUnion::standard, int threads = 1) {
  if (observations.empty())
    throw std::invalid_argument("reconstruct: empty observation list");
  const std::size_t n_vox = static_cast<std::size_t>(grid_dim) * grid_dim * grid_dim;
  std::vector<double> logits(n_vox, 0.0);
  VoxelGrid grid(grid_dim, 0.5);

  ReconstructionResult best;
  best.grid = grid;
  best.final_loss = std::numeric_limits<double>::infinity();

  AdamState adam;
  std::vector<double> grad(n_vox);
  int last_progress = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    for (std::size_t i = 0; i < n_vox; ++i) grid.values[i] = detail::sigmoid(logits[i]);
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (const ViewObservation& view : observations) {
      const ScGradResult eval =
          self_consistency_grad(grid, view.pose, view.mask, k, s, w, mode, threads,
                                GradRequest{.grid = true, .pose = false});
      loss += eval.loss;
      for (std::size_t i = 0; i < n_vox; ++i) grad[i] += eval.grads.d_grid[i];
    }
    const double scale = 1.0 / static_cast<double>(observations.size());
    loss *= scale;
    // chain through the logistic reparameterization
    for (std::size_t i = 0; i < n_vox; ++i)
      grad[i] *= scale * grid.values[i] * (1.0 - grid.values[i]);

    if (loss < best.final_loss - cfg.tol) last_progress = it;
    if (loss < best.final_loss) {
      best.final_loss = loss;
      best.grid = grid;
    }
    best.trace.push_back({it, best.final_loss});
    if (it - last_progress > detail::kNoProgressPatience) break;
    moment_step(adam, logits, grad, cfg);
    for (auto& l : logits) l = std::clamp(l, -detail::kLogitLimit, detail::kLogitLimit);
  }
  return best;
}

/// Simultaneous descent on grid logits and pose for a single view. Returns
/// the best grid and pose found; both final losses are the combined loss.
inline std::pair<ReconstructionResult, PoseEstimate> joint_refine(
    const VoxelGrid& init_grid, const Mask& mask, const CameraPose& init_pose,
    const Intrinsics& k, const SamplingConfig& s, const ConsistencyWeights& w,
    const OptimConfig& cfg, IouUnion mode = IouUnion::standard, int threads = 1) {
  const std::size_t n_vox = init_grid.values.size();
  std::vector<double> params(n_vox + 2);
  for (std::size_t i = 0; i < n_vox; ++i) params[i] = detail::logit(init_grid.values[i]);
  CameraPose pose = init_pose;
  detail::clamp_pose(pose);
  params[n_vox] = pose.azimuth;
  params[n_vox + 1] = pose.elevation;

  VoxelGrid grid(init_grid.dim);
  ReconstructionResult best_grid;
  PoseEstimate best_pose;
  double best_loss = std::numeric_limits<double>::infinity();
  best_grid.grid = init_grid;
  best_pose.pose = pose;

  AdamState adam;
  std::vector<double> grad(n_vox + 2);
  int last_progress = 0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    for (std::size_t i = 0; i < n_vox; ++i) grid.values[i] = detail::sigmoid(params[i]);
    pose.azimuth = params[n_vox];
    pose.elevation = params[n_vox + 1];
    const ScGradResult eval = self_consistency_grad(grid, pose, mask, k, s, w, mode, threads,
                                                    GradRequest{.grid = true, .pose = true});
    for (std::size_t i = 0; i < n_vox; ++i)
      grad[i] = eval.grads.d_grid[i] * grid.values[i] * (1.0 - grid.values[i]);
    grad[n_vox] = eval.grads.d_azimuth;
    grad[n_vox + 1] = eval.grads.d_elevation;

    if (eval.loss < best_loss - cfg.tol) last_progress = it;
    if (eval.loss < best_loss) {
      best_loss = eval.loss;
      best_grid.grid = grid;
      best_pose.pose = pose;
    }
    best_grid.trace.push_back({it, best_loss});
    best_pose.trace.push_back({it, best_loss, best_pose.pose.azimuth, best_pose.pose.elevation});
    if (it - last_progress > detail::kNoProgressPatience) break;
    moment_step(adam, params, grad, cfg);
    for (std::size_t i = 0; i < n_vox; ++i)
      params[i] = std::clamp(params[i], -detail::kLogitLimit, detail::kLogitLimit);
    params[n_vox] = wrap_angle(params[n_vox]);
    params[n_vox + 1] = std::clamp(params[n_vox + 1], -kPi / 2.0, kPi / 2.0);
  }
  best_grid.final_loss = best_loss;
  best_pose.final_loss = best_loss;
  return {std::move(best_grid), std::move(best_pose)};
}

}  // namespace voxsc
