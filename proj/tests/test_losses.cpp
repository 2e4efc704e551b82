#include <catch2/catch_amalgamated.hpp>

#include "voxsc/losses.hpp"
#include "voxsc/math.hpp"

using namespace voxsc;

TEST_CASE("pce_loss hand values") {
  VoxelGrid pred(1), gt(1);
  SECTION("occupied voxel predicted at one half, positive weight 3") {
    pred.values = {0.5};
    gt.values = {1.0};
    CHECK(pce_loss(pred, gt, 3.0) == Catch::Approx(3.0 * std::log(2.0)));
    CHECK(pce_loss(pred, gt, 3.0) == Catch::Approx(2.079442).margin(1e-6));
  }
  SECTION("empty voxel predicted at one half") {
    pred.values = {0.5};
    gt.values = {0.0};
    CHECK(pce_loss(pred, gt, 3.0) == Catch::Approx(std::log(2.0)));
  }
  SECTION("perfect binary fit is tiny after clamping") {
    VoxelGrid p4(4), g4(4);
    Rng rng(31);
    for (std::size_t i = 0; i < g4.values.size(); ++i)
      p4.values[i] = g4.values[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    CHECK(pce_loss(p4, g4, 3.0) <= 1e-5);
  }
  SECTION("dim mismatch throws") {
    const VoxelGrid other(2);
    CHECK_THROWS_AS(pce_loss(pred, other, 3.0), std::invalid_argument);
  }
}

TEST_CASE("pce_loss with unit positive weight equals the mask cross-entropy") {
  Rng rng(32);
  VoxelGrid pred(4), gt(4);
  for (auto& v : pred.values) v = rng.uniform();
  for (auto& v : gt.values) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  Mask pred_mask(8, 8), gt_mask(8, 8);
  pred_mask.values = pred.values;
  gt_mask.values = gt.values;
  CHECK(pce_loss(pred, gt, 1.0) == Catch::Approx(loss_2d(pred_mask, gt_mask)).margin(1e-12));
}

TEST_CASE("voxel_iou_loss hand values") {
  VoxelGrid a(2), b(2);
  SECTION("identical binary nonempty is zero") {
    a.values = {1, 0, 1, 0, 0, 1, 0, 1};
    CHECK(voxel_iou_loss(a, a) == Catch::Approx(0.0).margin(1e-12));
  }
  SECTION("disjoint binary is e - 1") {
    a.values = {1, 1, 0, 0, 0, 0, 0, 0};
    b.values = {0, 0, 0, 0, 0, 0, 1, 1};
    CHECK(voxel_iou_loss(a, b) == Catch::Approx(std::exp(1.0) - 1.0));
  }
  SECTION("one-third soft ratio") {
    a.values = {1, 1, 0, 0, 0, 0, 0, 0};
    b.values = {1, 0, 1, 0, 0, 0, 0, 0};
    // inner product 1, union 3
    CHECK(voxel_iou_loss(a, b) == Catch::Approx(std::exp(2.0 / 3.0) - 1.0));
    CHECK(voxel_iou_loss(a, b) == Catch::Approx(0.947735).margin(1e-6));
  }
}

TEST_CASE("voxel_iou_loss is symmetric on soft grids") {
  Rng rng(33);
  VoxelGrid a(3), b(3);
  for (int trial = 0; trial < 100; ++trial) {
    for (auto& v : a.values) v = rng.uniform();
    for (auto& v : b.values) v = rng.uniform();
    REQUIRE(voxel_iou_loss(a, b) == Catch::Approx(voxel_iou_loss(b, a)).margin(1e-14));
  }
}

TEST_CASE("loss_3d sums its components") {
  Rng rng(34);
  VoxelGrid pred(3), gt(3);
  for (auto& v : pred.values) v = rng.uniform();
  for (auto& v : gt.values) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
  CHECK(loss_3d(pred, gt, 3.0) ==
        Catch::Approx(pce_loss(pred, gt, 3.0) + voxel_iou_loss(pred, gt)).margin(1e-14));
  CHECK(loss_3d(gt, gt, 3.0) <= 1e-5);
}

TEST_CASE("loss_2d hand values and clamping") {
  Mask pred(1, 1), gt(1, 1);
  SECTION("half confidence on a positive pixel") {
    pred.values = {0.5};
    gt.values = {1.0};
    CHECK(loss_2d(pred, gt) == Catch::Approx(std::log(2.0)));
  }
  SECTION("confident wrong prediction is clamped, not infinite") {
    pred.values = {1.0};
    gt.values = {0.0};
    CHECK(loss_2d(pred, gt) == Catch::Approx(-std::log(1e-7)));
    CHECK(loss_2d(pred, gt) == Catch::Approx(16.118).margin(1e-2));
  }
  SECTION("binary perfect fit") {
    Mask p(4, 4), g(4, 4);
    Rng rng(35);
    for (std::size_t i = 0; i < p.values.size(); ++i)
      p.values[i] = g.values[i] = rng.uniform() < 0.5 ? 0.0 : 1.0;
    CHECK(loss_2d(p, g) <= 1e-5);
  }
  SECTION("dim mismatch throws") {
    const Mask other(2, 1);
    CHECK_THROWS_AS(loss_2d(pred, other), std::invalid_argument);
  }
}

TEST_CASE("kl_loss hand values") {
  CHECK(kl_loss({{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}) == 0.0);
  CHECK(kl_loss({{1.0}, {1.0}}) == Catch::Approx(0.5));
  CHECK(kl_loss({{0.0}, {4.0}}) == Catch::Approx(0.5 * (4.0 - std::log(4.0) - 1.0)));
  CHECK(kl_loss({{0.0}, {4.0}}) == Catch::Approx(0.806853).margin(1e-6));
  CHECK_THROWS_AS(kl_loss({{0.0}, {0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(kl_loss({{0.0}, {-1.0}}), std::invalid_argument);
}

TEST_CASE("kl_loss is nonnegative and convex in the mean") {
  Rng rng(36);
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.uniform(-3.0, 3.0);
    const double var = rng.uniform(0.05, 5.0);
    const double at_a = kl_loss({{a}, {var}});
    const double at_minus = kl_loss({{-a}, {var}});
    const double at_zero = kl_loss({{0.0}, {var}});
    REQUIRE(at_a >= 0.0);
    REQUIRE(at_a + at_minus >= 2.0 * at_zero - 1e-12);
  }
}

TEST_CASE("supervised_total weighted sum") {
  const LossWeights w;
  CHECK(supervised_total(0, 0, 0, 0, w) == 0.0);
  CHECK(supervised_total(1, 1, 1, 1, w) == Catch::Approx(2.02));
  LossWeights zero;
  zero.alpha3 = zero.alpha4 = zero.alpha5 = zero.alpha6 = 0.0;
  CHECK(supervised_total(3.0, 7.5, 0.1, 42.0, zero) == 0.0);
}

TEST_CASE("semi_total") {
  const LossWeights w;
  CHECK(semi_total(0, 0, w) == 0.0);
  CHECK(semi_total(1, 1, w) == Catch::Approx(1.02));
  LossWeights no_kl = w;
  no_kl.alpha6 = 0.0;
  CHECK(semi_total(0.75, 123.0, no_kl) == 0.75);
}
