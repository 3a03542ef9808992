#include "posedist/distortion.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <vector>

namespace posedist::distortion {
namespace {

Vec3 radial_term(const PixelPoint& p) {
  return {0.0, 0.0, p.u * p.u + p.v * p.v};
}

}  // namespace

PixelPoint undistort_division(const PixelPoint& distorted, double k) {
  const double denom = 1.0 + k * (distorted.u * distorted.u +
                                  distorted.v * distorted.v);
  if (!(denom > 0.0)) {
    throw std::invalid_argument("point outside the division model's domain");
  }
  return {distorted.u / denom, distorted.v / denom, distorted.frame};
}

PixelPoint distort_division(const PixelPoint& undistorted, double k) {
  const double r = std::hypot(undistorted.u, undistorted.v);
  if (r == 0.0) return undistorted;
  const double disc = 1.0 - 4.0 * k * r * r;
  if (disc < 0.0) {
    throw std::invalid_argument("point not reachable under this division model");
  }
  // Root of k r r'^2 - r' + r = 0 that tends to r as k -> 0.
  const double r_distorted = 2.0 * r / (1.0 + std::sqrt(disc));
  const double s = r_distorted / r;
  return {undistorted.u * s, undistorted.v * s, undistorted.frame};
}

DistortionSystem build_distortion_system(std::span<const PersonObservation> obs,
                                         HeightPrior h) {
  if (obs.size() < 2) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "distortion system needs at least two people");
  }
  const auto n = static_cast<Eigen::Index>(obs.size());
  DistortionSystem sys{Matrix::Zero(3 * n, 2 * n + 3),
                       Matrix::Zero(3 * n, 2 * n + 3)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = obs[static_cast<std::size_t>(i)];
    if (o.ankle.frame != Frame::kPrincipalCentered ||
        o.shoulder.frame != Frame::kPrincipalCentered) {
      throw std::invalid_argument(
          "distortion system expects principal-centered observations");
    }
    sys.A_prime.block<3, 1>(3 * i, 2 * i) = o.shoulder.homogeneous();
    sys.A_prime.block<3, 1>(3 * i, 2 * i + 1) = -o.ankle.homogeneous();
    sys.A_prime.block<3, 3>(3 * i, 2 * n) = -h.h * Mat3::Identity();
    sys.C.block<3, 1>(3 * i, 2 * i) = radial_term(o.shoulder);
    sys.C.block<3, 1>(3 * i, 2 * i + 1) = -radial_term(o.ankle);
  }
  return sys;
}

DistortionSolution solve_distortion(const DistortionSystem& system,
                                    const DistortionOptions& options) {
  const Matrix& Ap = system.A_prime;
  const Matrix& C = system.C;
  const auto n = static_cast<Eigen::Index>(system.people());
  if (Ap.rows() != 3 * n || Ap.cols() != 2 * n + 3 || C.rows() != Ap.rows() ||
      C.cols() != Ap.cols()) {
    throw std::invalid_argument("malformed distortion system");
  }

  const double r2_max = C.cwiseAbs().maxCoeff();
  const double r_ref2 = options.reference_radius > 0.0
                            ? options.reference_radius * options.reference_radius
                            : r2_max;

  const Matrix lhs = Ap.transpose() * Ap;
  const Matrix rhs = -(Ap.transpose() * C);
  Eigen::RealQZ<Matrix> qz(lhs.rows());
  qz.setMaxIterations(100 * lhs.rows());
  qz.compute(lhs, rhs, false);
  if (qz.info() != Eigen::Success) {
    throw EstimationFailure(FailureKind::kNoValidEigenpair,
                            "QZ iteration did not converge");
  }
  const Matrix& S = qz.matrixS();
  const Matrix& T = qz.matrixT();

  // Noise-free undistorted data make k = 0 a 0/0 pair in the pencil, so it
  // is always tried alongside the finite real eigenvalues.
  std::vector<double> candidates{0.0};
  for (Eigen::Index e = 0; e < S.rows(); ++e) {
    // A nonzero subdiagonal marks a 2x2 block holding a complex pair.
    if (e + 1 < S.rows() && S(e + 1, e) != 0.0) {
      ++e;
      continue;
    }
    const double beta = T(e, e);
    if (beta == 0.0) continue;
    const double k = S(e, e) / beta;
    if (std::isfinite(k)) candidates.push_back(k);
  }

  DistortionSolution best;
  best.residual = std::numeric_limits<double>::infinity();
  bool found = false;
  for (const double k : candidates) {
    if (std::abs(k) * r_ref2 > options.max_distortion) continue;
    if (!(1.0 + k * r2_max > 0.0)) continue;

    const Matrix M = Ap + k * C;
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    const Vector u = svd.matrixV().col(M.cols() - 1);
    const double residual = (M * u).norm() / u.norm();

    bool positive = true;
    bool negative = true;
    for (Eigen::Index j = 0; j < 2 * n; ++j) {
      positive = positive && u(j) > 0.0;
      negative = negative && u(j) < 0.0;
    }
    if (!positive && !negative) continue;

    const Vec3 v = u.tail<3>();
    const double norm = v.norm();
    if (!(norm > 0.0)) continue;

    if (residual < best.residual) {
      found = true;
      best.k = k;
      best.residual = residual;
      std::vector<double> lambda(u.data(), u.data() + 2 * n);
      const double sign = v.z() < 0.0 ? -1.0 : 1.0;
      best.v_tilde = sign * v / norm;
      for (auto& l : lambda) l *= sign / norm;
      best.lambda_prime = std::move(lambda);
    }
  }
  if (!found) {
    throw EstimationFailure(FailureKind::kNoValidEigenpair,
                            "no eigenpair passes the selection filters");
  }
  return best;
}

DistortedCalibration distorted_calibrate(std::span<const PersonObservation> obs,
                                         HeightPrior h, bool fx_eq_fy,
                                         const DistortionOptions& options) {
  if (obs.size() < std::max<std::size_t>(3, minimum_people(fx_eq_fy))) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "distortion solver needs at least three people");
  }
  double scale = 0.0;
  for (const auto& o : obs) {
    if (o.ankle.frame != Frame::kPrincipalCentered ||
        o.shoulder.frame != Frame::kPrincipalCentered) {
      throw std::invalid_argument(
          "distortion solver expects principal-centered observations");
    }
    scale = std::max({scale, std::hypot(o.ankle.u, o.ankle.v),
                      std::hypot(o.shoulder.u, o.shoulder.v)});
  }
  if (!(scale > 0.0)) scale = 1.0;

  Observations scaled(obs.begin(), obs.end());
  for (auto& o : scaled) {
    o.ankle.u /= scale;
    o.ankle.v /= scale;
    o.shoulder.u /= scale;
    o.shoulder.v /= scale;
  }
  DistortionOptions scaled_options = options;
  scaled_options.reference_radius = options.reference_radius / scale;

  const DistortionSolution sol =
      solve_distortion(build_distortion_system(scaled, h), scaled_options);
  const double k = sol.k / (scale * scale);

  Observations undistorted;
  undistorted.reserve(obs.size());
  for (const auto& o : obs) {
    try {
      undistorted.push_back(
          {undistort_division(o.ankle, k), undistort_division(o.shoulder, k)});
    } catch (const std::invalid_argument&) {
      throw EstimationFailure(FailureKind::kNoValidEigenpair,
                              "estimated distortion folds measured points");
    }
  }

  Vec3 v(sol.v_tilde.x() * scale, sol.v_tilde.y() * scale, sol.v_tilde.z());
  v.normalize();
  const DepthPairs depths = solve_scaled_depths(undistorted, v, h);
  const FocalSystem focal_system = build_focal_system(v, undistorted, depths);
  const FocalLengths focal = solve_focal(focal_system, fx_eq_fy);

  DistortedCalibration out;
  out.calibration = complete_calibration(undistorted, v, depths, focal, h);
  out.calibration.residuals.vanishing =
      (build_vanishing_system(undistorted) * v).norm();
  const Eigen::Vector2d s(1.0 / (focal.fx * focal.fx),
                          1.0 / (focal.fy * focal.fy));
  out.calibration.residuals.focal =
      (focal_system.B * s - focal_system.y).norm();
  out.model.k = k;
  out.eigen_residual = sol.residual;
  return out;
}

}  // namespace posedist::distortion
