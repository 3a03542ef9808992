#pragma once

// Joint estimation of a one-parameter division-model distortion k together
// with the vertical vanishing point and per-person depths.
//
// With measured (distorted) points x' and r = ||x'||, the undistorted point is
// x = x' / (1 + k r^2). In homogeneous form x_bar ~ x_bar' + k z with
// z = [0, 0, r^2], so stacking every person's
//   l'_T (x_bar'_T + k z_T) - l'_B (x_bar'_B + k z_B) - h v = 0
// gives (A' + k C) X' = 0 over X' = [l'_T1, l'_B1, ..., l'_TN, l'_BN, v].
// Premultiplying by A'^T yields the generalized eigenproblem
//   (A'^T A') X' = k (-A'^T C) X'
// which is solved with a QZ factorization.

#include "posedist/core.hpp"
#include "posedist/solver.hpp"

#include <span>
#include <vector>

namespace posedist::distortion {

struct DivisionModel {
  double k = 0.0;  // 1/px^2
};

/// x = x' / (1 + k ||x'||^2). Throws when the denominator is not positive.
PixelPoint undistort_division(const PixelPoint& distorted, double k);

/// Inverse of undistort_division. Throws when no distorted point maps to the
/// given one (k > 0 and 4 k r^2 > 1).
PixelPoint distort_division(const PixelPoint& undistorted, double k);

struct DistortionSystem {
  Matrix A_prime;  // 3N x (2N + 3)
  Matrix C;        // 3N x (2N + 3)

  std::size_t people() const {
    return static_cast<std::size_t>(A_prime.rows() / 3);
  }
};

DistortionSystem build_distortion_system(std::span<const PersonObservation> obs,
                                         HeightPrior h);

struct DistortionOptions {
  // Eigenvalues with |k| * r_ref^2 above this bound are rejected.
  double max_distortion = 4.0;
  // Reference radius in the system's pixel units. Zero uses the largest
  // measured radius found in C.
  double reference_radius = 0.0;
};

struct DistortionSolution {
  double k = 0.0;
  Vec3 v_tilde = Vec3::UnitZ();          // unit norm, third component >= 0
  std::vector<double> lambda_prime;      // 2N entries, T/B interleaved
  double residual = 0.0;                 // ||(A' + kC) X'|| / ||X'||
};

DistortionSolution solve_distortion(const DistortionSystem& system,
                                    const DistortionOptions& options = {});

struct DistortedCalibration {
  CalibrationResult calibration;
  DivisionModel model;
  double eigen_residual = 0.0;
};

/// Full pipeline on distorted measurements. Coordinates are normalized by the
/// largest measured radius internally for conditioning.
DistortedCalibration distorted_calibrate(std::span<const PersonObservation> obs,
                                         HeightPrior h, bool fx_eq_fy,
                                         const DistortionOptions& options = {});

}  // namespace posedist::distortion
