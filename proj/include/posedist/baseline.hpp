#pragma once

// Two-stage comparison estimator: locate the vertical vanishing point and the
// horizon line by intersecting and fitting image lines, then read the focal
// lengths off the pole-polar relation l ~ W p. Everything downstream of the
// intrinsics is shared with the direct solver.

#include "posedist/core.hpp"
#include "posedist/solver.hpp"

#include <span>

namespace posedist::baseline {

struct HorizonLine {
  Vec3 l = Vec3::UnitZ();  // (l1, l2) has unit norm
};

// Pair points with |w| below this fraction of their norm are treated as lying
// at infinity and skipped during the horizon fit.
inline constexpr double kInfinityTolerance = 1e-9;

/// Least-squares intersection of the per-person body lines, with each line
/// normalized so the residual is the point-to-line distance scale.
Vec3 vanishing_point_by_intersection(std::span<const PersonObservation> obs);

/// Horizon through the pairwise intersections of shoulder lines and ankle
/// lines, fitted by total least squares.
HorizonLine horizon_by_fitting(std::span<const PersonObservation> obs);

/// fx^2 = p1 l3 / (l1 p3), fy^2 = p2 l3 / (l2 p3). With fx_eq_fy the two
/// squared ratios are averaged.
FocalLengths focal_from_pole_polar(const Vec3& p, const HorizonLine& horizon,
                                   bool fx_eq_fy = false);

CalibrationResult baseline_calibrate(std::span<const PersonObservation> obs,
                                     HeightPrior h, bool fx_eq_fy);

}  // namespace posedist::baseline
