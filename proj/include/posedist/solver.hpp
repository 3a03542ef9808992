#pragma once

// Direct linear calibration from ankle/shoulder keypoints.
//
// Every person contributes lambda_T * xT - lambda_B * xB = h * K * N, with xT
// and xB the homogeneous principal-centered shoulder and ankle centers. The
// pipeline is:
//   1. v ~ K N from the stacked constraints (xT x xB)^T v = 0        (SVD)
//   2. scaled depths per person from the 3x2 system above             (LSQ)
//   3. (1/fx^2, 1/fy^2) from v^T W (lB_i xB_i - lB_j xB_j) = 0         (LSQ)
//   4. scale mu = +-sqrt(v^T W v), sign fixed by positive depths
//   5. back-projection X = lambda K^-1 x and plane offset rho.
//
// All functions expect principal-centered observations.

#include "posedist/core.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace posedist {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Smallest-to-largest singular value ratio treated as rank deficiency.
inline constexpr double kRankTolerance = 1e-12;

struct VanishingSolution {
  Vec3 v_tilde = Vec3::UnitZ();  // unit norm, third component >= 0
  double smallest_singular_value = 0.0;
};

// Per-person depths. Either scaled by the common unknown mu (after step 2) or
// metric (after dividing by mu).
struct DepthPairs {
  std::vector<double> shoulder;
  std::vector<double> ankle;

  std::size_t size() const { return ankle.size(); }
};

struct FocalSystem {
  Eigen::MatrixX2d B;
  Vector y;
};

struct FocalLengths {
  double fx = 0.0;
  double fy = 0.0;
};

struct ScaleRecovery {
  double mu = 0.0;  // signed
  Vec3 normal = Vec3::UnitZ();
};

struct CalibrationResult {
  CameraIntrinsics intrinsics;
  GroundPlane plane;
  Reconstruction reconstruction;
  double mu = 0.0;
  struct {
    double vanishing = 0.0;  // smallest singular value of the vanishing system
    double focal = 0.0;      // ||B s - y|| of the focal system
  } residuals;
};

Matrix build_vanishing_system(std::span<const PersonObservation> obs);

VanishingSolution solve_vanishing_direction(const Matrix& A);

/// Least squares per person on [x_T | -x_B] (l_T, l_B)^T = h v. The two image
/// rows are divided by the RMS keypoint radius of `obs` first.
DepthPairs solve_scaled_depths(std::span<const PersonObservation> obs,
                               const Vec3& v_tilde, HeightPrior h);

FocalSystem build_focal_system(const Vec3& v_tilde,
                               std::span<const PersonObservation> obs,
                               const DepthPairs& scaled_depths);

FocalLengths solve_focal(const FocalSystem& system, bool fx_eq_fy);

// |mu| = sqrt(v^T W v); sign chosen so every depth lambda = lambda~/mu > 0.
ScaleRecovery recover_scale(const Vec3& v_tilde, const Mat3& W,
                            const DepthPairs& scaled_depths);

DepthPairs unscale(const DepthPairs& scaled_depths, double mu);

Reconstruction reconstruct(const CameraIntrinsics& intrinsics,
                           const DepthPairs& depths,
                           std::span<const PersonObservation> obs);

// rho = h/2 - N^T (mean(X_B) + mean(X_T)) / 2.
double plane_offset(const Vec3& normal, const Reconstruction& reconstruction,
                    HeightPrior h);

/// Finishes a calibration once intrinsics and a vanishing direction are
/// known: scale recovery, back-projection and plane offset. Shared by every
/// estimator so their outputs differ only in how K and v were obtained.
CalibrationResult complete_calibration(std::span<const PersonObservation> obs,
                                       const Vec3& v_tilde,
                                       const DepthPairs& scaled_depths,
                                       const FocalLengths& focal,
                                       HeightPrior h);

/// Minimum number of people for a solvable configuration.
inline std::size_t minimum_people(bool fx_eq_fy) { return fx_eq_fy ? 2 : 3; }

CalibrationResult calibrate_batch(std::span<const PersonObservation> obs,
                                  HeightPrior h, bool fx_eq_fy);

/// Symmetric matrix of ankle-center distances in meters.
Matrix pairwise_distances(const Reconstruction& reconstruction);

// ---------------------------------------------------------------------------
// Geometry helpers on a calibrated camera (principal-centered frame).

/// Pinhole projection of a camera-frame point; requires positive depth.
Vec2 project(const CameraIntrinsics& intrinsics, const Vec3& X);

/// Intersects the viewing ray of a principal-centered pixel with the plane.
/// Returns nothing when the ray misses the plane in front of the camera.
std::optional<Vec3> back_project_to_plane(const CameraIntrinsics& intrinsics,
                                          const GroundPlane& plane,
                                          const Vec2& pixel);

/// Copies image geometry (principal point and size) into solver intrinsics.
CameraIntrinsics with_image_geometry(CameraIntrinsics solved,
                                     const CameraIntrinsics& image);

}  // namespace posedist
