#include "posedist/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace posedist;
using namespace posedist::sim;

TEST(Camera, FovRelation) {
  const auto a = make_camera(1920, 1080, 90.0);
  EXPECT_NEAR(a.fy, 540.0, 1e-9);
  EXPECT_NEAR(a.fx, 960.0, 1e-9);
  EXPECT_EQ(a.cx, 960.0);
  EXPECT_EQ(a.cy, 540.0);
  const auto b = make_camera(640, 480, 90.0);
  EXPECT_NEAR(b.fy, 240.0, 1e-9);
  EXPECT_NEAR(b.fx, 320.0, 1e-9);
  EXPECT_THROW(make_camera(640, 480, 0.5), std::invalid_argument);
}

TEST(Heights, TruncatedNormalStatistics) {
  Rng rng(17);
  double lo = 10, hi = -10, sum = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double h = sample_truncated_normal(rng, 1.7, 0.1, 1.5, 1.9);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
    sum += h;
  }
  EXPECT_GE(lo, 1.5);
  EXPECT_LE(hi, 1.9);
  EXPECT_NEAR(sum / n, 1.7, 0.01);
  EXPECT_EQ(sample_truncated_normal(rng, 1.7, 0.0, 1.5, 1.9), 1.7);
}

TEST(Scene, ConstructionInvariants) {
  SceneConfig config;
  config.person_count = 12;
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto s = sample_scene(config, rng);
    EXPECT_NEAR(s.plane.normal.norm(), 1.0, 1e-12);
    EXPECT_GT(s.plane.rho, 0.0);
    ASSERT_EQ(s.ankles.size(), 12u);
    for (std::size_t i = 0; i < s.ankles.size(); ++i) {
      EXPECT_NEAR(s.plane.signed_distance(s.ankles[i]), 0.0, 1e-12);
      EXPECT_EQ(s.heights[i], 1.7);
      EXPECT_NEAR((s.shoulders[i] - s.ankles[i] - 1.7 * s.plane.normal).norm(),
                  0.0, 1e-12);
      for (const Vec3& X : {s.ankles[i], s.shoulders[i]}) {
        ASSERT_GT(X.z(), 0.0);
        const Vec2 p = project(s.intrinsics, X);
        const PixelPoint raw = to_raw_image(
            {p.x(), p.y(), Frame::kPrincipalCentered}, s.intrinsics);
        EXPECT_TRUE(inside_image(raw, s.intrinsics));
      }
    }
  }
}

TEST(Measurement, Projection) {
  GroundTruthScene s;
  s.intrinsics = CameraIntrinsics::centered(960, 540, 1920, 1080);
  s.ankles = {Vec3(0, 0, 5)};
  s.shoulders = {Vec3(0, -1, 5)};
  Rng rng(1);
  const auto obs = project_scene(s, 0.0, {}, rng);
  EXPECT_EQ(obs[0].ankle.u, 0.0);
  EXPECT_EQ(obs[0].ankle.v, 0.0);
  EXPECT_EQ(obs[0].ankle.frame, Frame::kPrincipalCentered);
}

TEST(Measurement, PolynomialDistortion) {
  const Vec2 d = distort_polynomial(Vec2(100, 0), {1e-3, 0.0, 1.0});
  EXPECT_NEAR(d.x(), 1100.0, 1e-9);
  EXPECT_EQ(d.y(), 0.0);
}

TEST(Measurement, NoiseStatistics) {
  GroundTruthScene s;
  s.intrinsics = CameraIntrinsics::centered(960, 540, 1920, 1080);
  s.ankles = {Vec3(0.3, 0.2, 5)};
  s.shoulders = {Vec3(0.3, -1, 5)};
  const Vec2 clean = project(s.intrinsics, s.ankles[0]);
  Rng rng(8);
  double sum = 0, sum_sq = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double e = project_scene(s, 2.0, {}, rng)[0].ankle.u - clean.x();
    sum += e;
    sum_sq += e * e;
  }
  const double sd = std::sqrt(sum_sq / n - (sum / n) * (sum / n));
  EXPECT_NEAR(sd, 2.0, 0.1);
}

TEST(Trial, NoiseFreeBothSolversExact) {
  SceneConfig config;
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto out = run_trial(config, rng);
    ASSERT_EQ(out.metrics.size(), 2u);
    for (const auto& m : out.metrics) {
      ASSERT_TRUE(m);
      EXPECT_LT(m->fx, 1e-6);
      EXPECT_LT(m->fy, 1e-6);
      EXPECT_LT(m->normal, 1e-6);
      EXPECT_LT(m->rho, 1e-6);
      EXPECT_LT(m->recon, 1e-6);
    }
  }
}

TEST(Trial, TwoPeopleFailForBoth) {
  SceneConfig config;
  config.person_count = 2;
  Rng rng(3);
  const auto out = run_trial(config, rng);
  EXPECT_FALSE(out.metrics[0]);
  EXPECT_FALSE(out.metrics[1]);
}

TEST(Trial, SameSeedSameOutcome) {
  SceneConfig config;
  config.noise_std = 1.0;
  Rng a(77), b(77);
  const auto x = run_trial(config, a);
  const auto y = run_trial(config, b);
  ASSERT_EQ(x.metrics.size(), y.metrics.size());
  for (std::size_t i = 0; i < x.metrics.size(); ++i) {
    ASSERT_EQ(x.metrics[i].has_value(), y.metrics[i].has_value());
    if (x.metrics[i]) EXPECT_EQ(x.metrics[i]->fx, y.metrics[i]->fx);
  }
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
  SceneConfig config;
  config.noise_std = 0.5;
  config.rng_seed = 12;
  const auto one = run_monte_carlo(config, 60, {}, 1);
  const auto three = run_monte_carlo(config, 60, {}, 3);
  for (std::size_t e = 0; e < one.stats.size(); ++e) {
    EXPECT_EQ(one.stats[e].fx_err, three.stats[e].fx_err);
    EXPECT_EQ(one.stats[e].recon_err, three.stats[e].recon_err);
    EXPECT_EQ(one.stats[e].failure_rate, three.stats[e].failure_rate);
    EXPECT_EQ(one.stats[e].trial_count, 60u);
  }
}

TEST(MonteCarlo, ZeroTrialsRejected) {
  EXPECT_THROW(run_monte_carlo(SceneConfig{}, 0), std::invalid_argument);
}

TEST(Studies, ConfigurationShapes) {
  EXPECT_EQ(study_configs(Study::kNoiseFree, 1).size(), 12u);
  EXPECT_EQ(study_configs(Study::kNoise, 1).size(), 6u);
  EXPECT_EQ(study_configs(Study::kHeight, 1).size(), 5u);
  EXPECT_EQ(study_configs(Study::kCount, 1).size(), 5u);
  const auto d = study_configs(Study::kDistortion, 1);
  ASSERT_EQ(d.size(), 6u);
  const double k1[] = {1e-3, -1e-3, 1e-4, -1e-4, 1e-4, -1e-4};
  const double k2[] = {0, 0, 0, 0, 1e-5, 1e-5};
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& p = std::get<PolynomialDistortion>(d[i].distortion);
    EXPECT_EQ(p.k1, k1[i]);
    EXPECT_EQ(p.k2, k2[i]);
  }
  EXPECT_EQ(study_from_string("noise"), Study::kNoise);
  EXPECT_FALSE(study_from_string("bogus"));
}

TEST(Studies, CsvShape) {
  const auto rows = run_study(Study::kNoise, 5, 2, 1);
  EXPECT_EQ(rows.size(), 12u);
  std::ostringstream os;
  write_csv_header(os);
  write_csv_rows(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  EXPECT_EQ(columns, 22);
  int n = 0;
  while (std::getline(is, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, columns);
    ++n;
  }
  EXPECT_EQ(n, 12);
}
