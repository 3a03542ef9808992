#include "posedist/robust.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace posedist;
using namespace posedist::robust;

namespace {

oracle::Scene scene(int n) {
  oracle::Pose pose;
  pose.roll_deg = 30.0;
  return oracle::make_scene(960, 540, 1920, 1080, pose, oracle::spread(n, 6.0));
}

}  // namespace

TEST(RansacIterations, KnownValues) {
  const int n = ransac_iterations(0.99, 0.1, 3);
  EXPECT_TRUE(n == 4602 || n == 4603) << n;
  EXPECT_EQ(n, 4603);
  EXPECT_EQ(ransac_iterations(0.99, 1.0 - 1e-9, 3), 1);
  EXPECT_EQ(ransac_iterations(0.99, 0.5, 2), 17);
}

TEST(RansacIterations, MatchesFormula) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> p(0.5, 0.999), w(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const double conf = p(rng);
    const double ratio = w(rng);
    const int n = 1 + i % 4;
    const double expected =
        std::ceil(std::log1p(-conf) / std::log1p(-std::pow(ratio, n)));
    EXPECT_NEAR(ransac_iterations(conf, ratio, n), expected, 1.0);
  }
}

TEST(RansacIterations, RejectsOutOfRange) {
  EXPECT_THROW(ransac_iterations(1.0, 0.1, 3), std::invalid_argument);
  EXPECT_THROW(ransac_iterations(0.99, 0.0, 3), std::invalid_argument);
  EXPECT_THROW(ransac_iterations(0.99, 0.1, 0), std::invalid_argument);
}

TEST(Ransac, OutlierFreeEqualsBatch) {
  const auto s = scene(20);
  RansacConfig config;
  config.rng_seed = 4;
  const auto r = ransac_calibrate(s.obs, HeightPrior(s.h), config, false);
  const auto b = calibrate_batch(s.obs, HeightPrior(s.h), false);
  EXPECT_EQ(r.inlier_count, s.obs.size());
  for (const bool in : r.inliers) EXPECT_TRUE(in);
  EXPECT_NEAR(r.calibration.intrinsics.fx, b.intrinsics.fx,
              1e-9 * b.intrinsics.fx);
  EXPECT_NEAR(r.calibration.intrinsics.fy, b.intrinsics.fy,
              1e-9 * b.intrinsics.fy);
  EXPECT_LT((r.calibration.plane.normal - b.plane.normal).norm(), 1e-9);
  EXPECT_NEAR(r.calibration.plane.rho, b.plane.rho, 1e-9);
}

TEST(Ransac, PlantedOutliersExcluded) {
  auto s = scene(25);
  const auto clean = calibrate_batch(
      Observations(s.obs.begin(), s.obs.begin() + 20), HeightPrior(s.h), false);
  for (std::size_t i = 20; i < 25; ++i) s.obs[i].shoulder.u += 50.0;
  RansacConfig config;
  config.rng_seed = 8;
  const auto r = ransac_calibrate(s.obs, HeightPrior(s.h), config, false);
  for (std::size_t i = 0; i < 25; ++i) EXPECT_EQ(r.inliers[i], i < 20) << i;
  EXPECT_NEAR(r.calibration.intrinsics.fx, clean.intrinsics.fx, 1e-6);
  EXPECT_NEAR(r.calibration.intrinsics.fy, clean.intrinsics.fy, 1e-6);
  EXPECT_NEAR(r.calibration.intrinsics.fx, 960.0, 1e-6);
}

TEST(Ransac, Deterministic) {
  auto s = scene(15);
  for (std::size_t i = 0; i < 4; ++i) s.obs[i].shoulder.v -= 50.0;
  RansacConfig config;
  config.rng_seed = 99;
  config.max_iterations_cap = 300;
  const auto a = ransac_calibrate(s.obs, HeightPrior(s.h), config, false);
  const auto b = ransac_calibrate(s.obs, HeightPrior(s.h), config, false);
  EXPECT_EQ(a.inliers, b.inliers);
  EXPECT_EQ(a.calibration.intrinsics.fx, b.calibration.intrinsics.fx);
  EXPECT_EQ(a.calibration.plane.rho, b.calibration.plane.rho);
  EXPECT_EQ(a.iterations, 300);
}

TEST(Ransac, SquarePixelsUseTwoSamples) {
  oracle::Pose pose;
  const auto s =
      oracle::make_scene(1000, 1000, 1920, 1080, pose, oracle::spread(10));
  RansacConfig config;
  const auto r = ransac_calibrate(s.obs, HeightPrior(s.h), config, true);
  EXPECT_EQ(r.iterations, ransac_iterations(0.99, 0.1, 2));
  EXPECT_NEAR(r.calibration.intrinsics.fx, 1000.0, 1e-6);
}

TEST(Ransac, TooFewPeopleFails) {
  const auto s = scene(3);
  EXPECT_THROW(ransac_calibrate(s.obs, HeightPrior(s.h), {}, false),
               EstimationFailure);
}

TEST(Ransac, ReprojectionErrorZeroOnModel) {
  const auto s = scene(5);
  const auto b = calibrate_batch(s.obs, HeightPrior(s.h), false);
  for (const auto& o : s.obs) {
    EXPECT_LT(shoulder_reprojection_error(b, o, HeightPrior(s.h)), 1e-8);
  }
  auto moved = s.obs[0];
  moved.shoulder.u += 7.0;
  EXPECT_NEAR(shoulder_reprojection_error(b, moved, HeightPrior(s.h)), 7.0,
              1e-6);
}
