#include "posedist/distortion.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace posedist;
using namespace posedist::distortion;

namespace {

// Measured point x' with x = x' / (1 + k |x'|^2), found by bisection on the
// radius over the branch that contains r at k = 0.
Vec2 oracle_distort(const Vec2& x, double k) {
  const double r = x.norm();
  if (r == 0.0 || k == 0.0) return x;
  const auto g = [k](double rd) { return rd / (1.0 + k * rd * rd); };
  double lo = k > 0 ? r : 0.0;
  double hi = k > 0 ? 1.0 / std::sqrt(k) : r;
  if (g(hi) < r) return {NAN, NAN};
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < r ? lo : hi) = mid;
  }
  return x * (0.5 * (lo + hi) / r);
}

struct DistortedScene {
  oracle::Scene truth;
  Observations measured;
};

DistortedScene distorted_scene(double k, int n = 10) {
  oracle::Pose pose;
  pose.roll_deg = 28.0;
  pose.tilt_deg = 35.0;
  DistortedScene d{oracle::make_scene(960, 540, 1920, 1080, pose,
                                      oracle::spread(n, 7.0)),
                   {}};
  for (const auto& o : d.truth.obs) {
    const Vec2 a = oracle_distort(o.ankle.xy(), k);
    const Vec2 s = oracle_distort(o.shoulder.xy(), k);
    d.measured.push_back({{a.x(), a.y(), Frame::kPrincipalCentered},
                          {s.x(), s.y(), Frame::kPrincipalCentered}});
  }
  return d;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Division, Undistort) {
  const PixelPoint p{100, 0, Frame::kPrincipalCentered};
  const PixelPoint id = undistort_division(p, 0.0);
  EXPECT_EQ(id.u, 100.0);
  const PixelPoint q = undistort_division(p, 1e-6);
  EXPECT_NEAR(q.u, 100.0 / 1.01, 1e-12);
  EXPECT_NEAR(q.u, 99.0099, 1e-4);
  EXPECT_EQ(q.v, 0.0);
  const PixelPoint o = undistort_division({0, 0, Frame::kPrincipalCentered}, 3e-6);
  EXPECT_EQ(o.u, 0.0);
  EXPECT_EQ(o.v, 0.0);
  EXPECT_THROW(undistort_division({1000, 0}, -2e-6), std::invalid_argument);
}

TEST(Division, DistortThenUndistortIsIdentity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> c(-400, 400);
  for (const double k : {-1e-6, -1e-7, 0.0, 1e-7, 1e-6}) {
    for (int i = 0; i < 500; ++i) {
      const PixelPoint x{c(rng), c(rng) * 0.6, Frame::kPrincipalCentered};
      const PixelPoint back = undistort_division(distort_division(x, k), k);
      EXPECT_NEAR(back.u, x.u, 1e-12 * (1 + std::abs(x.u)));
      EXPECT_NEAR(back.v, x.v, 1e-12 * (1 + std::abs(x.v)));
      const Vec2 ref = oracle_distort(x.xy(), k);
      const PixelPoint d = distort_division(x, k);
      EXPECT_NEAR(d.u, ref.x(), 1e-9);
    }
  }
  EXPECT_THROW(distort_division({1000, 0}, 1e-6), std::invalid_argument);
}

TEST(DistortionSystem, Dimensions) {
  const auto d = distorted_scene(0.0, 2);
  const auto sys = build_distortion_system(d.measured, HeightPrior(d.truth.h));
  EXPECT_EQ(sys.A_prime.rows(), 6);
  EXPECT_EQ(sys.A_prime.cols(), 7);
  EXPECT_EQ(sys.C.rows(), 6);
  EXPECT_EQ(sys.C.cols(), 7);
  EXPECT_EQ(sys.people(), 2u);
}

TEST(DistortionSystem, TrueUnknownsAreInNullSpace) {
  for (const double k : {0.0, 4e-7, -8e-7}) {
    const auto d = distorted_scene(k, 5);
    const auto sys = build_distortion_system(d.measured, HeightPrior(d.truth.h));
    const auto n = static_cast<Eigen::Index>(d.measured.size());
    Vector x(2 * n + 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& m = d.measured[static_cast<std::size_t>(i)];
      const double rt = m.shoulder.xy().squaredNorm();
      const double rb = m.ankle.xy().squaredNorm();
      x(2 * i) = d.truth.shoulders[static_cast<std::size_t>(i)].z() / (1 + k * rt);
      x(2 * i + 1) = d.truth.ankles[static_cast<std::size_t>(i)].z() / (1 + k * rb);
    }
    x.tail<3>() = d.truth.K.K() * d.truth.plane.normal;
    const Vector r = (sys.A_prime + k * sys.C) * x;
    EXPECT_LT(r.norm(), 1e-9 * x.norm() * (1 + sys.A_prime.norm())) << k;
  }
}

TEST(DistortionSolve, RecoversK) {
  // The scene reaches about 530 px from the center, past the reachable radius
  // 1 / (2 sqrt(k)) for k = 1e-6.
  for (const double k : {1e-7, -1e-7, 3e-7, -3e-7, 6e-7, -1e-6}) {
    const auto d = distorted_scene(k);
    const auto r = distorted_calibrate(d.measured, HeightPrior(d.truth.h), false);
    EXPECT_LT(rel(r.model.k, k), 1e-6) << k;
    EXPECT_LT(r.eigen_residual, 1e-8);
    EXPECT_LT(rel(r.calibration.intrinsics.fx, 960.0) * 100, 1e-4);
    EXPECT_LT(rel(r.calibration.intrinsics.fy, 540.0) * 100, 1e-4);
    EXPECT_LT(normal_error(r.calibration.plane.normal, d.truth.plane.normal),
              1e-4);
    EXPECT_LT(rho_error(r.calibration.plane.rho, d.truth.plane.rho), 1e-4);
  }
}

TEST(DistortionSolve, ZeroDistortionAgreesWithPinhole) {
  const auto d = distorted_scene(0.0);
  const auto r = distorted_calibrate(d.measured, HeightPrior(d.truth.h), false);
  double r_max = 0;
  for (const auto& o : d.measured) {
    r_max = std::max({r_max, o.ankle.xy().norm(), o.shoulder.xy().norm()});
  }
  EXPECT_LT(std::abs(r.model.k) * r_max * r_max, 1e-9);
  const auto b = calibrate_batch(d.measured, HeightPrior(d.truth.h), false);
  EXPECT_LT(rel(r.calibration.intrinsics.fx, b.intrinsics.fx), 1e-6);
  EXPECT_LT(rel(r.calibration.intrinsics.fy, b.intrinsics.fy), 1e-6);
  EXPECT_LT(oracle::angle_between(r.calibration.plane.normal, b.plane.normal),
            1e-6);
}

TEST(DistortionSolve, PolynomialLensBetterModeledThanIgnored) {
  for (const double k1 : {1e-3, -1e-3}) {
    const auto s = oracle::default_scene(20);
    Observations measured;
    for (const auto& o : s.obs) {
      const auto warp = [&](const PixelPoint& p) {
        const double r2 = p.xy().squaredNorm() / (960.0 * 960.0);
        const double g = 1 + k1 * r2;
        return PixelPoint{g * p.u, g * p.v, Frame::kPrincipalCentered};
      };
      measured.push_back({warp(o.ankle), warp(o.shoulder)});
    }
    const auto with = distorted_calibrate(measured, HeightPrior(s.h), false);
    const auto without = calibrate_batch(measured, HeightPrior(s.h), false);
    EXPECT_LT(focal_error(with.calibration.intrinsics.fx, 960.0),
              focal_error(without.intrinsics.fx, 960.0));
  }
}

TEST(DistortionSolve, NeedsThreePeople) {
  const auto d = distorted_scene(1e-7, 2);
  EXPECT_THROW(distorted_calibrate(d.measured, HeightPrior(d.truth.h), false),
               EstimationFailure);
}

TEST(DistortionSolve, RawFrameRejected) {
  auto d = distorted_scene(0.0, 4);
  d.measured[1].shoulder.frame = Frame::kRawImage;
  EXPECT_THROW(distorted_calibrate(d.measured, HeightPrior(d.truth.h), false),
               std::invalid_argument);
}
