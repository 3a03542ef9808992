#include "posedist/robust.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace posedist::robust {

void RansacConfig::validate() const {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("RANSAC confidence must be in (0, 1)");
  }
  if (!(inlier_ratio_prior > 0.0 && inlier_ratio_prior < 1.0)) {
    throw std::invalid_argument("inlier ratio prior must be in (0, 1)");
  }
  if (min_samples != 0 && min_samples != 2 && min_samples != 3) {
    throw std::invalid_argument("min_samples must be 2 or 3");
  }
  if (!(inlier_threshold_px > 0.0)) {
    throw std::invalid_argument("inlier threshold must be positive");
  }
  if (max_iterations_cap < 1) {
    throw std::invalid_argument("iteration cap must be positive");
  }
}

int ransac_iterations(double confidence, double inlier_ratio,
                      int min_samples) {
  if (!(confidence > 0.0 && confidence < 1.0) ||
      !(inlier_ratio > 0.0 && inlier_ratio < 1.0) || min_samples < 1) {
    throw std::invalid_argument("RANSAC iteration arguments out of range");
  }
  const double all_inlier = std::pow(inlier_ratio, min_samples);
  const double iters =
      std::ceil(std::log(1.0 - confidence) / std::log(1.0 - all_inlier));
  if (!(iters >= 1.0)) return 1;
  if (iters > static_cast<double>(std::numeric_limits<int>::max())) {
    return std::numeric_limits<int>::max();
  }
  return static_cast<int>(iters);
}

double shoulder_reprojection_error(const CalibrationResult& model,
                                   const PersonObservation& obs,
                                   HeightPrior h) {
  const auto ankle =
      back_project_to_plane(model.intrinsics, model.plane, obs.ankle.xy());
  if (!ankle) return std::numeric_limits<double>::infinity();
  const Vec3 shoulder = *ankle + h.h * model.plane.normal;
  if (!(shoulder.z() > 0.0)) return std::numeric_limits<double>::infinity();
  return (project(model.intrinsics, shoulder) - obs.shoulder.xy()).norm();
}

RansacResult ransac_calibrate(std::span<const PersonObservation> obs,
                              HeightPrior h, const RansacConfig& config,
                              bool fx_eq_fy) {
  config.validate();
  const int n = config.min_samples != 0
                    ? config.min_samples
                    : static_cast<int>(minimum_people(fx_eq_fy));
  if (n < static_cast<int>(minimum_people(fx_eq_fy))) {
    throw std::invalid_argument("min_samples below the model's minimum");
  }
  if (obs.size() <= static_cast<std::size_t>(n)) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "RANSAC needs more people than the sample size");
  }
  const int iterations =
      std::min(ransac_iterations(config.confidence, config.inlier_ratio_prior,
                                 n),
               config.max_iterations_cap);

  std::mt19937_64 rng(config.rng_seed);
  std::vector<std::size_t> indices(obs.size());
  std::vector<PersonObservation> sample(static_cast<std::size_t>(n));
  std::vector<bool> best_mask;
  std::size_t best_count = 0;

  for (int it = 0; it < iterations; ++it) {
    // Partial Fisher-Yates: the first n entries become the sample.
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    for (int k = 0; k < n; ++k) {
      std::uniform_int_distribution<std::size_t> pick(
          static_cast<std::size_t>(k), indices.size() - 1);
      std::swap(indices[static_cast<std::size_t>(k)], indices[pick(rng)]);
      sample[static_cast<std::size_t>(k)] =
          obs[indices[static_cast<std::size_t>(k)]];
    }
    CalibrationResult model;
    try {
      model = calibrate_batch(sample, h, fx_eq_fy);
    } catch (const EstimationFailure&) {
      continue;
    }
    std::vector<bool> mask(obs.size());
    std::size_t count = 0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      mask[i] = shoulder_reprojection_error(model, obs[i], h) <=
                config.inlier_threshold_px;
      count += mask[i] ? 1 : 0;
    }
    if (count > best_count) {
      best_count = count;
      best_mask = std::move(mask);
    }
  }

  if (best_count == 0) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "no RANSAC hypothesis produced a model");
  }
  if (best_count < static_cast<std::size_t>(n) + 1) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "maximum inlier set is too small");
  }
  std::vector<PersonObservation> inlier_obs;
  inlier_obs.reserve(best_count);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (best_mask[i]) inlier_obs.push_back(obs[i]);
  }
  RansacResult result{calibrate_batch(inlier_obs, h, fx_eq_fy),
                      std::move(best_mask), best_count, iterations};
  return result;
}

}  // namespace posedist::robust
