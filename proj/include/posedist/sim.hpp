#pragma once

// Synthetic scenes that satisfy the ground-plane, upright and height
// assumptions, measurement corruption, and the Monte Carlo harness behind the
// sensitivity studies.

#include "posedist/core.hpp"
#include "posedist/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace posedist::sim {

using Rng = std::mt19937_64;

/// Forward polynomial lens model x_d = c + (1 + k1 r^2 + k2 r^4)(x - c), with
/// r = ||x - c|| / radius_unit_px. radius_unit_px = 1 gives pixel units.
struct PolynomialDistortion {
  double k1 = 0.0;
  double k2 = 0.0;
  double radius_unit_px = 1.0;
};

/// Exact division model, synthesized by inverting x = x' / (1 + k r'^2).
struct DivisionDistortion {
  double k = 0.0;  // 1/px^2
};

using LensDistortion =
    std::variant<std::monostate, PolynomialDistortion, DivisionDistortion>;

struct SceneConfig {
  int width = 1920;
  int height = 1080;
  double fov_deg = 90.0;  // vertical
  int person_count = 3;
  double noise_std = 0.0;  // pixels

  double height_mean = 1.7;
  double height_std = 0.0;  // 0: every person is exactly height_mean
  double height_min = 1.5;
  double height_max = 1.9;

  LensDistortion distortion;

  // Camera pose. Roll magnitude is uniform in [roll_min, roll_max] with a
  // random sign; zero roll leaves fx unobservable.
  double camera_height_min = 2.0;
  double camera_height_max = 8.0;
  double tilt_min_deg = 10.0;
  double tilt_max_deg = 50.0;
  double roll_min_deg = 20.0;
  double roll_max_deg = 55.0;
  // Ankles are drawn uniformly over the image and back-projected; points
  // farther than this from the camera footprint are redrawn.
  double ground_range_m = 20.0;

  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct GroundTruthScene {
  CameraIntrinsics intrinsics;
  GroundPlane plane;
  std::vector<Vec3> ankles;
  std::vector<Vec3> shoulders;
  std::vector<double> heights;
};

/// fy = (H/2) / tan(fov/2), fx = (W/H) fy, principal point at the center.
CameraIntrinsics make_camera(int width, int height, double fov_deg);

double sample_truncated_normal(Rng& rng, double mean, double stddev, double lo,
                               double hi);

GroundTruthScene sample_scene(const SceneConfig& config, Rng& rng);

/// Applies the polynomial model to a principal-centered point.
Vec2 distort_polynomial(const Vec2& centered, const PolynomialDistortion& d);

/// Projects every person (principal-centered output), distorts, then adds
/// i.i.d. Gaussian pixel noise.
Observations project_scene(const GroundTruthScene& scene, double noise_std,
                           const LensDistortion& distortion, Rng& rng);

struct TrialMetrics {
  double fx = 0.0;
  double fy = 0.0;
  double normal = 0.0;
  double rho = 0.0;
  double recon = 0.0;
};

TrialMetrics evaluate(const CalibrationResult& estimate,
                      const GroundTruthScene& truth);

enum class Estimator { kDirect, kBaseline, kDistortion };
std::string_view to_string(Estimator e);

struct TrialOptions {
  bool fx_eq_fy = false;
  std::vector<Estimator> estimators = {Estimator::kDirect,
                                       Estimator::kBaseline};
};

// One entry per requested estimator, in TrialOptions order; nullopt marks a
// failed estimate.
struct TrialOutcome {
  std::vector<std::optional<TrialMetrics>> metrics;
};

/// Samples one scene and one measurement set and feeds the same observations
/// to every estimator.
TrialOutcome run_trial(const SceneConfig& config, Rng& rng,
                       const TrialOptions& options = {});

struct MonteCarloResult {
  std::vector<Estimator> estimators;
  std::vector<TrialStats> stats;  // aligned with estimators
};

/// Per-trial generators are seeded from (config.rng_seed, trial index), so
/// the aggregate does not depend on the worker count.
MonteCarloResult run_monte_carlo(const SceneConfig& config, int trials,
                                 const TrialOptions& options = {},
                                 unsigned workers = 0);

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

// ---------------------------------------------------------------------------
// Sensitivity studies.

enum class Study { kNoiseFree, kNoise, kHeight, kCount, kDistortion };
std::string_view to_string(Study s);
std::optional<Study> study_from_string(std::string_view name);

struct StudyRow {
  Study study;
  SceneConfig config;
  std::string solver;
  TrialStats stats;
};

std::vector<SceneConfig> study_configs(Study study, std::uint64_t seed);

/// Runs every configuration of a study; rows are ordered by configuration,
/// then solver.
std::vector<StudyRow> run_study(Study study, int trials, std::uint64_t seed,
                                unsigned workers = 0);

void write_csv_header(std::ostream& os);
void write_csv_rows(std::ostream& os, const std::vector<StudyRow>& rows);

}  // namespace posedist::sim
