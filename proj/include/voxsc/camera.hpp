#pragma once

#include <vector>

#include "voxsc/math.hpp"

namespace voxsc {

/// Pinhole intrinsics in pixel units.
struct Intrinsics {
  double f_u = 0.0;  // horizontal focal length
  double f_v = 0.0;  // vertical focal length
  double u_0 = 0.0;  // principal point column
  double v_0 = 0.0;  // principal point row

  /// Default intrinsics for a WxH image: focal length equal to the image
  /// width and the principal point at the image center. At unit depth the
  /// continuous frustum half-width is then exactly 0.5 world units, the
  /// cross-section of the voxel cube.
  static Intrinsics for_image(int width, int height) {
    const double w = static_cast<double>(width);
    return {w, w, w / 2.0, static_cast<double>(height) / 2.0};
  }
};

/// Two-angle camera pose (azimuth about the world up-axis, elevation about
/// the camera x-axis) plus a fixed translation applied in the camera frame.
struct CameraPose {
  double azimuth = 0.0;    // radians, kept in [-pi, pi)
  double elevation = 0.0;  // radians, in [-pi/2, pi/2]
  Vec3 translation{0.0, 0.0, -0.5};
};

/// Depth sampling scheme along a ray: n_samples depths strictly inside
/// (depth_min, depth_max], evenly spaced, ending exactly at depth_max.
struct SamplingConfig {
  int n_samples = 64;
  double depth_min = 0.0;
  double depth_max = 1.0;
};

/// R = R_y(azimuth) . R_x(elevation).
inline Mat3 rotation_matrix(const CameraPose& pose) {
  const double ca = std::cos(pose.azimuth), sa = std::sin(pose.azimuth);
  const double ce = std::cos(pose.elevation), se = std::sin(pose.elevation);
  Mat3 r;
  r.m = {ca, sa * se, sa * ce,
         0.0, ce, -se,
         -sa, ca * se, ca * ce};
  return r;
}

struct RotationGrad {
  Mat3 d_azimuth;
  Mat3 d_elevation;
};

/// Entrywise derivatives of rotation_matrix with respect to the two angles.
inline RotationGrad rotation_matrix_grad(const CameraPose& pose) {
  const double ca = std::cos(pose.azimuth), sa = std::sin(pose.azimuth);
  const double ce = std::cos(pose.elevation), se = std::sin(pose.elevation);
  RotationGrad g;
  g.d_azimuth.m = {-sa, ca * se, ca * ce,
                   0.0, 0.0, 0.0,
                   -ca, -sa * se, -sa * ce};
  g.d_elevation.m = {0.0, sa * ce, -sa * se,
                     0.0, -se, -ce,
                     0.0, ca * ce, -ca * se};
  return g;
}

/// Direction of the ray through image location (u, v); z component is 1.
inline Vec3 ray_direction(double u, double v, const Intrinsics& k) {
  return {(u - k.u_0) / k.f_u, (v - k.v_0) / k.f_v, 1.0};
}

/// Depth of the i-th sample (1-based), strictly increasing, last = depth_max.
inline double sample_depth(int i, const SamplingConfig& s) {
  return s.depth_min + (static_cast<double>(i) / s.n_samples) * (s.depth_max - s.depth_min);
}

/// The n_samples points along the ray through (u, v), in camera coordinates.
inline std::vector<Vec3> sample_points(double u, double v, const Intrinsics& k,
                                       const SamplingConfig& s) {
  const Vec3 dir = ray_direction(u, v, k);
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(s.n_samples));
  for (int i = 1; i <= s.n_samples; ++i) pts.push_back(dir * sample_depth(i, s));
  return pts;
}

/// Camera-frame point to world coordinates: R (l + t).
inline Vec3 to_world(const CameraPose& pose, const Vec3& l) {
  return rotation_matrix(pose) * (l + pose.translation);
}

}  // namespace voxsc
