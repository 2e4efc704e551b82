#include <catch2/catch_amalgamated.hpp>

#include "voxsc/math.hpp"
#include "voxsc/voxel.hpp"

using namespace voxsc;

namespace {

VoxelGrid random_grid(int dim, Rng& rng) {
  VoxelGrid g(dim);
  for (auto& v : g.values) v = rng.uniform();
  return g;
}

}  // namespace

TEST_CASE("trilinear_sample returns the node value at voxel centers") {
  Rng rng(5);
  VoxelGrid g = random_grid(4, rng);
  for (int x = 0; x < 4; ++x)
    for (int y = 0; y < 4; ++y)
      for (int z = 0; z < 4; ++z) {
        const Vec3 p{g.center(x), g.center(y), g.center(z)};
        REQUIRE(trilinear_sample(g, p) == Catch::Approx(g.at(x, y, z)).margin(1e-14));
      }
}

TEST_CASE("trilinear_sample midpoint of adjacent centers averages them") {
  VoxelGrid g(4);
  g.at(1, 2, 2) = 0.0;
  g.at(2, 2, 2) = 1.0;
  const Vec3 mid{(g.center(1) + g.center(2)) / 2.0, g.center(2), g.center(2)};
  CHECK(trilinear_sample(g, mid) == Catch::Approx(0.5));
}

TEST_CASE("trilinear_sample reads zero outside the grid support") {
  Rng rng(6);
  const VoxelGrid g = random_grid(8, rng);
  CHECK(trilinear_sample(g, {2.0, 2.0, 2.0}) == 0.0);
  CHECK(trilinear_sample(g, {-1.0, 0.0, 0.0}) == 0.0);
  // At the support edge the falloff band has started but values stay bounded.
  CHECK(trilinear_sample(g, {0.5, 0.0, 0.0}) <= 1.0);
}

TEST_CASE("trilinear_sample is Lipschitz along each axis") {
  Rng rng(7);
  const int dim = 8;
  const VoxelGrid g = random_grid(dim, rng);
  const double lipschitz = dim * 1.0;  // dim * max |value|
  for (int trial = 0; trial < 500; ++trial) {
    // probe across cell boundaries as well as inside cells
    const Vec3 p{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    const double delta = rng.uniform(1e-6, 0.02);
    const int axis = static_cast<int>(rng.index(3));
    Vec3 q = p;
    (axis == 0 ? q.x : axis == 1 ? q.y : q.z) += delta;
    const double diff = std::abs(trilinear_sample(g, p) - trilinear_sample(g, q));
    REQUIRE(diff <= lipschitz * delta + 1e-12);
  }
}

TEST_CASE("trilinear_grad corner weights reproduce the sample") {
  Rng rng(8);
  const VoxelGrid g = random_grid(8, rng);
  for (int trial = 0; trial < 500; ++trial) {
    const Vec3 p{rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7)};
    const TrilinearGrad tg = trilinear_grad(g, p);
    double recon = 0.0, wsum = 0.0;
    for (const CornerWeight& c : tg.corners) {
      REQUIRE(c.weight >= 0.0);
      if (c.index >= 0) recon += c.weight * g.values[static_cast<std::size_t>(c.index)];
      wsum += c.weight;
    }
    REQUIRE(recon == Catch::Approx(trilinear_sample(g, p)).margin(1e-12));
    REQUIRE(wsum <= 1.0 + 1e-12);
  }
}

TEST_CASE("trilinear_grad at a voxel center puts full weight on that voxel") {
  Rng rng(9);
  const VoxelGrid g = random_grid(4, rng);
  const TrilinearGrad tg = trilinear_grad(g, {g.center(2), g.center(1), g.center(3)});
  double on = 0.0, total = 0.0;
  for (const CornerWeight& c : tg.corners) {
    total += c.weight;
    if (c.index == static_cast<std::int64_t>(VoxelGrid::index(4, 2, 1, 3))) on += c.weight;
  }
  CHECK(on == Catch::Approx(1.0).margin(1e-14));
  CHECK(total == Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("trilinear_grad spatial derivative vanishes in a uniform field") {
  const VoxelGrid g(6, 0.37);
  Rng rng(10);
  for (int trial = 0; trial < 100; ++trial) {
    // strictly interior, away from the padding falloff
    const Vec3 p{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)};
    const TrilinearGrad tg = trilinear_grad(g, p);
    REQUIRE(std::abs(tg.d_point.x) < 1e-12);
    REQUIRE(std::abs(tg.d_point.y) < 1e-12);
    REQUIRE(std::abs(tg.d_point.z) < 1e-12);
  }
}

TEST_CASE("trilinear_grad spatial derivative matches finite differences") {
  Rng rng(11);
  const VoxelGrid g = random_grid(8, rng);
  const double h = 1e-6;
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Vec3 p{rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45)};
    // skip probes whose +-h window straddles a cell face
    const auto cell = [&](double w) { return std::floor((w + 0.5) * 8 - 0.5); };
    bool clean = true;
    for (const double c : {p.x, p.y, p.z})
      clean = clean && cell(c - 2 * h) == cell(c + 2 * h);
    if (!clean) continue;
    const TrilinearGrad tg = trilinear_grad(g, p);
    const double fx = (trilinear_sample(g, {p.x + h, p.y, p.z}) -
                       trilinear_sample(g, {p.x - h, p.y, p.z})) /
                      (2 * h);
    const double fy = (trilinear_sample(g, {p.x, p.y + h, p.z}) -
                       trilinear_sample(g, {p.x, p.y - h, p.z})) /
                      (2 * h);
    const double fz = (trilinear_sample(g, {p.x, p.y, p.z + h}) -
                       trilinear_sample(g, {p.x, p.y, p.z - h})) /
                      (2 * h);
    for (const auto [a, fd] : {std::pair{tg.d_point.x, fx}, std::pair{tg.d_point.y, fy},
                               std::pair{tg.d_point.z, fz}}) {
      if (std::abs(a) < 1e-9 && std::abs(fd) < 1e-9) continue;
      REQUIRE(std::abs(a - fd) / std::max(std::abs(a), std::abs(fd)) < 1e-5);
    }
    ++checked;
  }
  REQUIRE(checked > 100);
}

TEST_CASE("increasing a voxel value never decreases a sample") {
  Rng rng(12);
  VoxelGrid g = random_grid(6, rng);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    const double before = trilinear_sample(g, p);
    const std::size_t idx = rng.index(g.values.size());
    const double saved = g.values[idx];
    g.values[idx] = std::min(1.0, saved + 0.25);
    REQUIRE(trilinear_sample(g, p) >= before - 1e-15);
    g.values[idx] = saved;
  }
}

TEST_CASE("binarize thresholds values") {
  VoxelGrid a(3, 0.6);
  for (const double v : binarize(a, 0.5).values) REQUIRE(v == 1.0);
  VoxelGrid b(3, 0.4);
  for (const double v : binarize(b, 0.5).values) REQUIRE(v == 0.0);
  VoxelGrid mixed(2);
  mixed.values = {0.2, 0.8, 0.8, 0.2, 0.2, 0.8, 0.5, 0.2};
  const VoxelGrid bin = binarize(mixed, 0.5);
  const std::vector<double> expected = {0, 1, 1, 0, 0, 1, 1, 0};
  CHECK(bin.values == expected);
}

TEST_CASE("voxel_iou counting") {
  VoxelGrid a(2), b(2);
  SECTION("identical nonempty grids have IoU 1") {
    a.values = {1, 0, 1, 0, 1, 0, 1, 0};
    CHECK(voxel_iou(a, a) == 1.0);
  }
  SECTION("disjoint nonempty grids have IoU 0") {
    a.values = {1, 1, 0, 0, 0, 0, 0, 0};
    b.values = {0, 0, 0, 0, 0, 0, 1, 1};
    CHECK(voxel_iou(a, b) == 0.0);
  }
  SECTION("partial overlap") {
    a.values = {1, 1, 1, 1, 1, 1, 1, 1};
    b.values = {1, 1, 1, 1, 0, 0, 0, 0};
    CHECK(voxel_iou(a, b) == Catch::Approx(0.5));
  }
  SECTION("both empty counts as 1") { CHECK(voxel_iou(a, b) == 1.0); }
  SECTION("dim mismatch throws") {
    const VoxelGrid c(3);
    CHECK_THROWS_AS(voxel_iou(a, c), std::invalid_argument);
  }
}

TEST_CASE("voxel_iou matches a 4-in-10 hand count") {
  // 4 overlapping of union 10: |a|=7, |b|=7, inter 4 -> union 10
  VoxelGrid a(3), b(3);
  for (int i = 0; i < 7; ++i) a.values[static_cast<std::size_t>(i)] = 1.0;
  for (int i = 3; i < 10; ++i) b.values[static_cast<std::size_t>(i)] = 1.0;
  CHECK(voxel_iou(a, b) == Catch::Approx(0.4));
}
