#include "posedist/baseline.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

using namespace posedist;
using namespace posedist::baseline;

namespace {

PersonObservation centered(Vec2 bottom, Vec2 top) {
  return {{bottom.x(), bottom.y(), Frame::kPrincipalCentered},
          {top.x(), top.y(), Frame::kPrincipalCentered}};
}

// Image of the plane's line at infinity: l ~ K^-T N.
Vec3 true_horizon(const oracle::Scene& s) {
  return s.K.K_inv().transpose() * s.plane.normal;
}

}  // namespace

TEST(BaselineVanishing, ConcurrentLines) {
  const Observations obs = {centered({1, 0}, {0.5, 1}),
                            centered({-1, 0}, {-0.5, 1})};
  const Vec3 p = vanishing_point_by_intersection(obs);
  EXPECT_LT(oracle::angle_between(p, Vec3(0, 2, 1).normalized()), 1e-12);
}

TEST(BaselineVanishing, ParallelSegmentsMeetAtInfinity) {
  const Observations obs = {centered({0, 0}, {0, -1}), centered({1, 0}, {1, -1})};
  const Vec3 p = vanishing_point_by_intersection(obs);
  EXPECT_NEAR(std::abs(p.y()), 1.0, 1e-12);
  EXPECT_NEAR(p.z(), 0.0, 1e-12);
}

TEST(BaselineVanishing, MatchesKN) {
  const auto s = oracle::default_scene(7);
  Vec3 kn = (s.K.K() * s.plane.normal).normalized();
  if (kn.z() < 0) kn = -kn;
  EXPECT_LT(oracle::angle_between(vanishing_point_by_intersection(s.obs), kn),
            1e-9);
}

TEST(BaselineHorizon, PairPointsLieOnTrueHorizon) {
  const auto s = oracle::default_scene(3);
  const Vec3 l = true_horizon(s);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const Vec3 top = s.obs[i].shoulder.homogeneous().cross(
          s.obs[j].shoulder.homogeneous());
      const Vec3 bottom =
          s.obs[i].ankle.homogeneous().cross(s.obs[j].ankle.homogeneous());
      const Vec3 q = top.cross(bottom);
      const Vec2 x = q.head<2>() / q.z();
      EXPECT_LT(std::abs(l.dot(Vec3(x.x(), x.y(), 1))) / l.head<2>().norm(),
                1e-9 * (1 + x.norm()));
    }
  }
  const HorizonLine fit = horizon_by_fitting(s.obs);
  EXPECT_LT(std::min(oracle::angle_between(fit.l, l.normalized()),
                     oracle::angle_between(fit.l, -l.normalized())),
            1e-9);
}

TEST(BaselineHorizon, ParallelPairIsSkipped) {
  // Two identical-looking people side by side: top and bottom lines are
  // parallel, so there are fewer than two finite points.
  const Observations obs = {centered({-100, 50}, {-100, -50}),
                            centered({100, 50}, {100, -50}),
                            centered({0, 80}, {0, -40})};
  // The remaining two finite pair points still define a line.
  const HorizonLine l = horizon_by_fitting(obs);
  EXPECT_NEAR(l.l.head<2>().norm(), 1.0, 1e-12);
  const Observations only_parallel = {centered({-100, 50}, {-100, -50}),
                                      centered({100, 50}, {100, -50}),
                                      centered({300, 50}, {300, -50})};
  EXPECT_THROW(horizon_by_fitting(only_parallel), EstimationFailure);
}

TEST(BaselineHorizon, FitMinimizesResidual) {
  const Observations obs = {centered({-200, 100}, {-190, -20}),
                            centered({50, 140}, {52, -10}),
                            centered({300, 90}, {280, -40}),
                            centered({-20, 200}, {-15, 30})};
  const HorizonLine fit = horizon_by_fitting(obs);
  std::vector<Vec2> pts;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      const Vec3 q = obs[i].shoulder.homogeneous()
                         .cross(obs[j].shoulder.homogeneous())
                         .cross(obs[i].ankle.homogeneous().cross(
                             obs[j].ankle.homogeneous()));
      pts.push_back(q.head<2>() / q.z());
    }
  }
  const auto cost = [&](const Vec3& l) {
    double c = 0;
    for (const auto& p : pts) {
      const double d = l.dot(Vec3(p.x(), p.y(), 1)) / l.head<2>().norm();
      c += d * d;
    }
    return c;
  };
  const double best = cost(fit.l);
  for (int k = 0; k < 8; ++k) {
    Vec3 other = fit.l;
    other(k % 3) += (k < 3 ? 1e-3 : -1e-3) * (1 + std::abs(other(k % 3)));
    EXPECT_GE(cost(other), best);
  }
}

TEST(BaselineFocal, PolePolarOnTrueGeometry) {
  const auto s = oracle::default_scene(5);
  const Vec3 p = s.K.K() * s.plane.normal;
  const Vec3 l = true_horizon(s);
  const HorizonLine h{l / l.head<2>().norm()};
  const FocalLengths f = focal_from_pole_polar(p, h, false);
  EXPECT_NEAR(f.fx / 960.0, 1.0, 1e-6);
  EXPECT_NEAR(f.fy / 540.0, 1.0, 1e-6);
  const FocalLengths g = focal_from_pole_polar(-p, HorizonLine{-h.l}, false);
  EXPECT_NEAR(g.fx, f.fx, 1e-9 * f.fx);
  EXPECT_NEAR(g.fy, f.fy, 1e-9 * f.fy);
  const FocalLengths flipped = focal_from_pole_polar(p, HorizonLine{-h.l}, false);
  EXPECT_NEAR(flipped.fx, f.fx, 1e-9 * f.fx);
}

TEST(BaselineFocal, PointAtInfinityFails) {
  EXPECT_THROW(focal_from_pole_polar(Vec3(0, 1, 0), HorizonLine{Vec3(0, 1, 5)}),
               EstimationFailure);
}

TEST(BaselineCalibrate, NoiseFreeExactAndEqualToDirect) {
  for (const double roll : {-30.0, 20.0}) {
    oracle::Pose pose;
    pose.roll_deg = roll;
    const auto s =
        oracle::make_scene(1500, 1200, 1920, 1080, pose, oracle::spread(6));
    const auto b = baseline_calibrate(s.obs, HeightPrior(s.h), false);
    const auto d = calibrate_batch(s.obs, HeightPrior(s.h), false);
    EXPECT_NEAR(b.intrinsics.fx / 1500.0, 1.0, 1e-6);
    EXPECT_NEAR(b.intrinsics.fy / 1200.0, 1.0, 1e-6);
    EXPECT_NEAR(b.intrinsics.fx / d.intrinsics.fx, 1.0, 1e-6);
    EXPECT_LT(oracle::angle_between(b.plane.normal, s.plane.normal), 1e-9);
    EXPECT_NEAR(b.plane.rho / s.plane.rho, 1.0, 1e-6);
  }
}

TEST(BaselineCalibrate, ScalingHomogeneousInputsKeepsIntrinsics) {
  // Dehomogenized inputs are unchanged by a common scale of (u, v, 1); the
  // vanishing point and horizon are projective objects, so their ratio is too.
  const auto s = oracle::default_scene(6);
  const Vec3 p = vanishing_point_by_intersection(s.obs);
  const HorizonLine l = horizon_by_fitting(s.obs);
  const FocalLengths a = focal_from_pole_polar(p, l);
  const FocalLengths b = focal_from_pole_polar(3.5 * p, HorizonLine{l.l * 2.0});
  EXPECT_NEAR(a.fx, b.fx, 1e-9 * a.fx);
  EXPECT_NEAR(a.fy, b.fy, 1e-9 * a.fy);
}
