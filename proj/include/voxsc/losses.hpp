#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "voxsc/consistency.hpp"
#include "voxsc/voxel.hpp"

namespace voxsc {

/// Weights of the supervised/semi-supervised loss terms and the
/// positive-class weight of the voxel cross-entropy.
struct LossWeights {
  double alpha3 = 0.5;   // 3D reconstruction term
  double alpha4 = 0.5;   // 2D mask term
  double alpha5 = 1.0;   // self-consistency term
  double alpha6 = 0.02;  // KL term
  double alpha_p = 3.0;  // positive-class weight, >= 1
};

/// Diagonal Gaussian over a latent code, parameterized by per-dimension
/// mean and variance.
struct LatentGaussian {
  std::vector<double> mean;
  std::vector<double> variance;
};

namespace detail {

inline constexpr double kLogClamp = 1e-7;

inline double clamped(double p) {
  return std::clamp(p, kLogClamp, 1.0 - kLogClamp);
}

inline void check_same_dim(const VoxelGrid& a, const VoxelGrid& b, const char* what) {
  if (a.dim != b.dim) throw std::invalid_argument(std::string(what) + ": grid dims differ");
}

}  // namespace detail

/// Positive-weighted binary cross-entropy, mean over voxels. Predictions
/// are clamped to [1e-7, 1 - 1e-7] before the logs.
inline double pce_loss(const VoxelGrid& pred, const VoxelGrid& gt, double alpha_p) {
  detail::check_same_dim(pred, gt, "pce_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = detail::clamped(pred.values[i]);
    const double y = gt.values[i];
    total += -alpha_p * y * std::log(p) - (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(pred.values.size());
}

/// Soft-IoU penalty between two grids; same form as projection_loss.
inline double voxel_iou_loss(const VoxelGrid& pred, const VoxelGrid& gt,
                             IouUnion mode = IouUnion::standard) {
  detail::check_same_dim(pred, gt, "voxel_iou_loss");
  double inter = 0.0, uni = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = pred.values[i], y = gt.values[i];
    inter += p * y;
    uni += mode == IouUnion::standard ? p + y - p * y : p + y + p * y;
  }
  if (uni <= 0.0) return 0.0;
  return std::exp(1.0 - inter / uni) - 1.0;
}

/// Voxel reconstruction loss: weighted cross-entropy plus the IoU penalty.
inline double loss_3d(const VoxelGrid& pred, const VoxelGrid& gt, double alpha_p,
                      IouUnion mode = IouUnion::standard) {
  return pce_loss(pred, gt, alpha_p) + voxel_iou_loss(pred, gt, mode);
}

/// Mask reconstruction loss: mean binary cross-entropy over pixels.
inline double loss_2d(const Mask& pred, const Mask& gt) {
  detail::check_same_dims(pred, gt, "loss_2d");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.values.size(); ++i) {
    const double p = detail::clamped(pred.values[i]);
    const double y = gt.values[i];
    total += -y * std::log(p) - (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(pred.values.size());
}

/// KL divergence of a diagonal Gaussian from the standard normal:
/// 0.5 * sum(mean^2 + var - log(var) - 1).
inline double kl_loss(const LatentGaussian& z) {
  if (z.mean.size() != z.variance.size())
    throw std::invalid_argument("kl_loss: mean/variance dims differ");
  double total = 0.0;
  for (std::size_t i = 0; i < z.mean.size(); ++i) {
    const double var = z.variance[i];
    if (var <= 0.0) throw std::invalid_argument("kl_loss: nonpositive variance");
    total += z.mean[i] * z.mean[i] + var - std::log(var) - 1.0;
  }
  return 0.5 * total;
}

/// Fully supervised total: alpha3*L3D + alpha4*L2D + alpha5*Lsc + alpha6*LKL.
inline double supervised_total(double l3d, double l2d, double lsc, double lkl,
                               const LossWeights& w) {
  return w.alpha3 * l3d + w.alpha4 * l2d + w.alpha5 * lsc + w.alpha6 * lkl;
}

/// Semi-supervised total: Lsc + alpha6*LKL.
inline double semi_total(double lsc, double lkl, const LossWeights& w) {
  return lsc + w.alpha6 * lkl;
}

}  // namespace voxsc
