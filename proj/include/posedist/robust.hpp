#pragma once

#include "posedist/core.hpp"
#include "posedist/solver.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace posedist::robust {

struct RansacConfig {
  double confidence = 0.99;
  double inlier_ratio_prior = 0.1;
  // 0 selects the minimal count for the focal model (2 or 3).
  int min_samples = 0;
  double inlier_threshold_px = 5.0;
  int max_iterations_cap = 10000;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// ceil(log(1 - p) / log(1 - ratio^n)), at least 1.
int ransac_iterations(double confidence, double inlier_ratio, int min_samples);

struct RansacResult {
  CalibrationResult calibration;
  std::vector<bool> inliers;
  std::size_t inlier_count = 0;
  int iterations = 0;
};

/// Reprojection error of the measured shoulder center under a calibrated
/// model: intersect the ankle ray with the plane, lift by h along N and
/// project. Infinite when the ankle ray misses the plane.
double shoulder_reprojection_error(const CalibrationResult& model,
                                   const PersonObservation& obs,
                                   HeightPrior h);

RansacResult ransac_calibrate(std::span<const PersonObservation> obs,
                              HeightPrior h, const RansacConfig& config,
                              bool fx_eq_fy);

}  // namespace posedist::robust
