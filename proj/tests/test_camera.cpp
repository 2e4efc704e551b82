#include <catch2/catch_amalgamated.hpp>

#include "voxsc/camera.hpp"
#include "voxsc/math.hpp"

using namespace voxsc;

TEST_CASE("rotation_matrix at zero angles is the identity") {
  const Mat3 r = rotation_matrix({0.0, 0.0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(r(i, j) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-15));
}

TEST_CASE("rotation_matrix quarter azimuth turn maps +z to +x") {
  const Mat3 r = rotation_matrix({kPi / 2.0, 0.0});
  const Vec3 v = r * Vec3{0.0, 0.0, 1.0};
  CHECK(v.x == Catch::Approx(1.0).margin(1e-12));
  CHECK(v.y == Catch::Approx(0.0).margin(1e-12));
  CHECK(v.z == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("rotation_matrix is orthonormal with unit determinant") {
  Rng rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const CameraPose pose{rng.uniform(-kPi, kPi), rng.uniform(-kPi / 2, kPi / 2)};
    const Mat3 r = rotation_matrix(pose);
    const Mat3 rtr = transpose(r) * r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        REQUIRE(std::abs(rtr(i, j) - (i == j ? 1.0 : 0.0)) < 1e-12);
    const double det = r(0, 0) * (r(1, 1) * r(2, 2) - r(1, 2) * r(2, 1)) -
                       r(0, 1) * (r(1, 0) * r(2, 2) - r(1, 2) * r(2, 0)) +
                       r(0, 2) * (r(1, 0) * r(2, 1) - r(1, 1) * r(2, 0));
    REQUIRE(std::abs(det - 1.0) < 1e-12);
  }
}

TEST_CASE("rotation_matrix_grad entries at zero angles") {
  const RotationGrad g = rotation_matrix_grad({0.0, 0.0});
  CHECK(g.d_azimuth(0, 2) == Catch::Approx(1.0));
  CHECK(g.d_elevation(1, 2) == Catch::Approx(-1.0));
}

TEST_CASE("rotation_matrix_grad matches central finite differences") {
  Rng rng(42);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const CameraPose pose{rng.uniform(-kPi, kPi), rng.uniform(-kPi / 2, kPi / 2)};
    const RotationGrad g = rotation_matrix_grad(pose);
    CameraPose lo = pose, hi = pose;
    lo.azimuth -= h;
    hi.azimuth += h;
    const Mat3 ra_lo = rotation_matrix(lo), ra_hi = rotation_matrix(hi);
    lo = hi = pose;
    lo.elevation -= h;
    hi.elevation += h;
    const Mat3 re_lo = rotation_matrix(lo), re_hi = rotation_matrix(hi);
    for (int i = 0; i < 9; ++i) {
      const double fd_az = (ra_hi.m[i] - ra_lo.m[i]) / (2 * h);
      const double fd_el = (re_hi.m[i] - re_lo.m[i]) / (2 * h);
      worst = std::max({worst, std::abs(fd_az - g.d_azimuth.m[i]),
                        std::abs(fd_el - g.d_elevation.m[i])});
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("ray_direction examples") {
  const Intrinsics k{48.0, 48.0, 24.0, 24.0};
  const Vec3 center = ray_direction(24.0, 24.0, k);
  CHECK(center.x == 0.0);
  CHECK(center.y == 0.0);
  CHECK(center.z == 1.0);

  const Vec3 offset = ray_direction(24.0 + 48.0, 24.0, k);
  CHECK(offset.x == Catch::Approx(1.0));
  CHECK(offset.z == 1.0);

  const Vec3 d = ray_direction(10.0, 20.0, k);
  CHECK(d.x == Catch::Approx(-14.0 / 48.0));
  CHECK(d.y == Catch::Approx(-4.0 / 48.0));
  CHECK(d.z == 1.0);
}

TEST_CASE("sample_points on the principal ray") {
  const Intrinsics k{48.0, 48.0, 24.0, 24.0};
  const SamplingConfig s{4, 0.0, 1.0};
  const auto pts = sample_points(24.0, 24.0, k, s);
  REQUIRE(pts.size() == 4);
  const double depths[4] = {0.25, 0.5, 0.75, 1.0};
  for (int i = 0; i < 4; ++i) {
    CHECK(pts[static_cast<std::size_t>(i)].x == 0.0);
    CHECK(pts[static_cast<std::size_t>(i)].y == 0.0);
    CHECK(pts[static_cast<std::size_t>(i)].z == Catch::Approx(depths[i]));
  }
}

TEST_CASE("sample_points default count ends at unit depth") {
  const Intrinsics k = Intrinsics::for_image(48, 48);
  const SamplingConfig s;
  REQUIRE(s.n_samples == 64);
  const auto pts = sample_points(10.0, 30.0, k, s);
  REQUIRE(pts.size() == 64);
  CHECK(pts.back().z == Catch::Approx(1.0));
}

TEST_CASE("sample_points unit-offset ray") {
  const Intrinsics k{48.0, 48.0, 24.0, 24.0};
  const SamplingConfig s{2, 0.0, 1.0};
  const auto pts = sample_points(24.0 + 48.0, 24.0, k, s);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].x == Catch::Approx(0.5));
  CHECK(pts[0].z == Catch::Approx(0.5));
  CHECK(pts[1].x == Catch::Approx(1.0));
  CHECK(pts[1].z == Catch::Approx(1.0));
}

TEST_CASE("sample_points depths increase and scale inversely with focal length") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const double fu = rng.uniform(10.0, 100.0), fv = rng.uniform(10.0, 100.0);
    const Intrinsics k{fu, fv, 24.0, 24.0};
    const double c = rng.uniform(1.5, 4.0);
    const Intrinsics scaled{fu * c, fv * c, 24.0, 24.0};
    const SamplingConfig s{8, rng.uniform(0.0, 0.2), rng.uniform(0.5, 2.0)};
    const double u = rng.uniform(0.0, 48.0), v = rng.uniform(0.0, 48.0);
    const auto pts = sample_points(u, v, k, s);
    const auto pts_scaled = sample_points(u, v, scaled, s);
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) REQUIRE(pts[i].z < pts[i + 1].z);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      REQUIRE(pts_scaled[i].x == Catch::Approx(pts[i].x / c).margin(1e-12));
      REQUIRE(pts_scaled[i].y == Catch::Approx(pts[i].y / c).margin(1e-12));
      REQUIRE(pts_scaled[i].z == pts[i].z);
    }
  }
}

TEST_CASE("to_world examples") {
  SECTION("mid-depth point lands on the origin under the default translation") {
    const CameraPose pose;  // az=0, el=0, t=(0,0,-0.5)
    const Vec3 w = to_world(pose, {0.0, 0.0, 0.5});
    CHECK(w.x == Catch::Approx(0.0).margin(1e-15));
    CHECK(w.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(w.z == Catch::Approx(0.0).margin(1e-15));
  }
  SECTION("identity pose with zero translation is the identity map") {
    CameraPose pose;
    pose.translation = {0.0, 0.0, 0.0};
    const Vec3 l{0.2, -0.3, 0.7};
    const Vec3 w = to_world(pose, l);
    CHECK(w.x == Catch::Approx(l.x));
    CHECK(w.y == Catch::Approx(l.y));
    CHECK(w.z == Catch::Approx(l.z));
  }
  SECTION("quarter turn moves the far point onto +x") {
    CameraPose pose;
    pose.azimuth = kPi / 2.0;
    const Vec3 w = to_world(pose, {0.0, 0.0, 1.0});
    CHECK(w.x == Catch::Approx(0.5).margin(1e-12));
    CHECK(w.y == Catch::Approx(0.0).margin(1e-12));
    CHECK(w.z == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("to_world preserves distances") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const CameraPose pose{rng.uniform(-kPi, kPi), rng.uniform(-kPi / 2, kPi / 2),
                          {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}};
    const Vec3 a{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vec3 b{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    REQUIRE(norm(to_world(pose, a) - to_world(pose, b)) ==
            Catch::Approx(norm(a - b)).margin(1e-12));
  }
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(kPi) == Catch::Approx(-kPi));
  CHECK(wrap_angle(3.0 * kPi / 2.0) == Catch::Approx(-kPi / 2.0));
  CHECK(wrap_angle(-5.0 * kPi) == Catch::Approx(-kPi));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-30.0, 30.0);
    const double w = wrap_angle(a);
    REQUIRE(w >= -kPi);
    REQUIRE(w < kPi);
    CHECK(std::remainder(a - w, 2.0 * kPi) == Catch::Approx(0.0).margin(1e-9));
  }
}
