#include "posedist/solver.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace posedist {
namespace {

void require_centered(std::span<const PersonObservation> obs) {
  for (const auto& o : obs) {
    if (o.ankle.frame != Frame::kPrincipalCentered ||
        o.shoulder.frame != Frame::kPrincipalCentered) {
      throw std::invalid_argument(
          "solver expects principal-centered observations");
    }
  }
}

void require_people(std::size_t have, std::size_t need) {
  if (have < need) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "need at least " + std::to_string(need) +
                                " people, got " + std::to_string(have));
  }
}

}  // namespace

Matrix build_vanishing_system(std::span<const PersonObservation> obs) {
  require_centered(obs);
  require_people(obs.size(), 2);
  Matrix A(static_cast<Eigen::Index>(obs.size()), 3);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Vec3 row = obs[i].shoulder.homogeneous().cross(
        obs[i].ankle.homogeneous());
    A.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return A;
}

VanishingSolution solve_vanishing_direction(const Matrix& A) {
  if (A.cols() != 3) throw std::invalid_argument("vanishing system is Nx3");
  require_people(static_cast<std::size_t>(A.rows()), 2);

  // Pad to at least three rows so the full V is always available.
  Matrix padded = A;
  if (padded.rows() < 3) {
    padded.conservativeResize(3, 3);
    padded.bottomRows(3 - A.rows()).setZero();
  }
  Eigen::JacobiSVD<Matrix> svd(padded, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) / s(0) < kRankTolerance) {
    throw EstimationFailure(FailureKind::kRankDeficient,
                            "vanishing system has rank below 2");
  }
  Vec3 v = svd.matrixV().col(2);
  // Canonical sign: first non-zero component from the back is positive.
  for (int k = 2; k >= 0; --k) {
    if (v(k) != 0.0) {
      if (v(k) < 0.0) v = -v;
      break;
    }
  }
  return {v, s(2)};
}

DepthPairs solve_scaled_depths(std::span<const PersonObservation> obs,
                               const Vec3& v_tilde, HeightPrior h) {
  require_centered(obs);
  DepthPairs depths;
  depths.shoulder.reserve(obs.size());
  depths.ankle.reserve(obs.size());
  // Isotropic rescaling of the image axes so the depth-difference row is not
  // swamped by the two pixel-scaled rows. Exact data is unaffected.
  double sum_sq = 0.0;
  for (const auto& o : obs) {
    sum_sq += o.ankle.xy().squaredNorm() + o.shoulder.xy().squaredNorm();
  }
  const double scale =
      obs.empty() ? 1.0 : std::sqrt(sum_sq / (2.0 * static_cast<double>(obs.size())));
  const Vec3 w = scale > 0.0 ? Vec3(1.0 / scale, 1.0 / scale, 1.0)
                             : Vec3::Ones();
  const Vec3 rhs = w.cwiseProduct(h.h * v_tilde);
  for (const auto& o : obs) {
    Eigen::Matrix<double, 3, 2> M;
    M.col(0) = w.cwiseProduct(o.shoulder.homogeneous());
    M.col(1) = -w.cwiseProduct(o.ankle.homogeneous());
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(
        M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (!(s(0) > 0.0) || s(1) / s(0) < kRankTolerance) {
      throw EstimationFailure(FailureKind::kRankDeficient,
                              "shoulder and ankle points coincide");
    }
    const Eigen::Vector2d lambda = svd.solve(rhs);
    depths.shoulder.push_back(lambda(0));
    depths.ankle.push_back(lambda(1));
  }
  return depths;
}

FocalSystem build_focal_system(const Vec3& v_tilde,
                               std::span<const PersonObservation> obs,
                               const DepthPairs& scaled_depths) {
  require_centered(obs);
  require_people(obs.size(), 2);
  if (scaled_depths.size() != obs.size()) {
    throw std::invalid_argument("depths do not match observations");
  }
  const std::size_t n = obs.size();
  const auto m = static_cast<Eigen::Index>(n * (n - 1) / 2);
  FocalSystem sys{Eigen::MatrixX2d(m, 2), Vector(m)};
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 pi = scaled_depths.ankle[i] * obs[i].ankle.homogeneous();
    for (std::size_t j = i + 1; j < n; ++j, ++row) {
      const Vec3 pj = scaled_depths.ankle[j] * obs[j].ankle.homogeneous();
      const Vec3 r = v_tilde.cwiseProduct(pi - pj);
      sys.B(row, 0) = r(0);
      sys.B(row, 1) = r(1);
      sys.y(row) = -r(2);
    }
  }
  return sys;
}

FocalLengths solve_focal(const FocalSystem& system, bool fx_eq_fy) {
  const auto& B = system.B;
  Eigen::Vector2d s;
  if (fx_eq_fy) {
    require_people(static_cast<std::size_t>(B.rows()), 1);
    const Vector b = B.col(0) + B.col(1);
    const double bb = b.squaredNorm();
    if (!(bb > 0.0) ||
        std::sqrt(bb) < kRankTolerance * system.y.norm()) {
      throw EstimationFailure(FailureKind::kRankDeficient,
                              "focal system is degenerate");
    }
    s.setConstant(b.dot(system.y) / bb);
  } else {
    if (B.rows() < 2) {
      throw EstimationFailure(FailureKind::kInsufficientData,
                              "focal system needs at least two equations");
    }
    Eigen::JacobiSVD<Matrix> svd(Matrix(B),
                                 Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (!(sv(0) > 0.0) || sv(1) / sv(0) < kRankTolerance) {
      throw EstimationFailure(FailureKind::kRankDeficient,
                              "focal system is rank deficient");
    }
    s = svd.solve(system.y);
  }
  if (!(s(0) > 0.0) || !(s(1) > 0.0)) {
    throw EstimationFailure(FailureKind::kNonPositiveFocal,
                            "no positive solution for 1/f^2");
  }
  return {1.0 / std::sqrt(s(0)), 1.0 / std::sqrt(s(1))};
}

ScaleRecovery recover_scale(const Vec3& v_tilde, const Mat3& W,
                            const DepthPairs& scaled_depths) {
  const double q = v_tilde.dot(W * v_tilde);
  if (!(q > 0.0)) {
    throw EstimationFailure(FailureKind::kRankDeficient,
                            "degenerate vanishing direction");
  }
  bool all_positive = true;
  bool all_negative = true;
  for (const auto* list : {&scaled_depths.shoulder, &scaled_depths.ankle}) {
    for (const double d : *list) {
      all_positive = all_positive && d > 0.0;
      all_negative = all_negative && d < 0.0;
    }
  }
  if (!all_positive && !all_negative) {
    throw EstimationFailure(FailureKind::kCheirality,
                            "depths have mixed signs under both scale signs");
  }
  const double mu = all_positive ? std::sqrt(q) : -std::sqrt(q);
  const Vec3 k_inv_v(v_tilde(0) * std::sqrt(W(0, 0)),
                     v_tilde(1) * std::sqrt(W(1, 1)), v_tilde(2));
  return {mu, (k_inv_v / mu).normalized()};
}

DepthPairs unscale(const DepthPairs& scaled_depths, double mu) {
  DepthPairs out = scaled_depths;
  for (auto& d : out.shoulder) d /= mu;
  for (auto& d : out.ankle) d /= mu;
  return out;
}

Reconstruction reconstruct(const CameraIntrinsics& intrinsics,
                           const DepthPairs& depths,
                           std::span<const PersonObservation> obs) {
  require_centered(obs);
  if (depths.size() != obs.size()) {
    throw std::invalid_argument("depths do not match observations");
  }
  const Mat3 K_inv = intrinsics.K_inv();
  Reconstruction rec;
  rec.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double lt = depths.shoulder[i];
    const double lb = depths.ankle[i];
    if (!(lt > 0.0) || !(lb > 0.0)) {
      throw EstimationFailure(FailureKind::kCheirality,
                              "non-positive depth in reconstruction");
    }
    rec.push_back({lb, lt, lb * (K_inv * obs[i].ankle.homogeneous()),
                   lt * (K_inv * obs[i].shoulder.homogeneous())});
  }
  return rec;
}

double plane_offset(const Vec3& normal, const Reconstruction& reconstruction,
                    HeightPrior h) {
  if (reconstruction.empty()) {
    throw std::invalid_argument("plane offset needs at least one person");
  }
  Vec3 bottom = Vec3::Zero();
  Vec3 top = Vec3::Zero();
  for (const auto& p : reconstruction) {
    bottom += p.ankle;
    top += p.shoulder;
  }
  const double n = static_cast<double>(reconstruction.size());
  return 0.5 * h.h - normal.dot(0.5 * (bottom / n + top / n));
}

CalibrationResult complete_calibration(std::span<const PersonObservation> obs,
                                       const Vec3& v_tilde,
                                       const DepthPairs& scaled_depths,
                                       const FocalLengths& focal,
                                       HeightPrior h) {
  CalibrationResult result;
  result.intrinsics = CameraIntrinsics{focal.fx, focal.fy, 0.0, 0.0, 0.0, 0.0};
  const ScaleRecovery scale =
      recover_scale(v_tilde, result.intrinsics.W(), scaled_depths);
  result.mu = scale.mu;
  result.reconstruction =
      reconstruct(result.intrinsics, unscale(scaled_depths, scale.mu), obs);
  result.plane.normal = scale.normal;
  result.plane.rho = plane_offset(scale.normal, result.reconstruction, h);
  if (!(result.plane.rho > 0.0)) {
    throw EstimationFailure(FailureKind::kCheirality,
                            "camera is not above the estimated plane");
  }
  return result;
}

CalibrationResult calibrate_batch(std::span<const PersonObservation> obs,
                                  HeightPrior h, bool fx_eq_fy) {
  require_people(obs.size(), minimum_people(fx_eq_fy));
  const Matrix A = build_vanishing_system(obs);
  const VanishingSolution vanishing = solve_vanishing_direction(A);
  const DepthPairs depths = solve_scaled_depths(obs, vanishing.v_tilde, h);
  const FocalSystem focal_system =
      build_focal_system(vanishing.v_tilde, obs, depths);
  const FocalLengths focal = solve_focal(focal_system, fx_eq_fy);

  CalibrationResult result =
      complete_calibration(obs, vanishing.v_tilde, depths, focal, h);
  result.residuals.vanishing = vanishing.smallest_singular_value;
  const Eigen::Vector2d s(1.0 / (focal.fx * focal.fx),
                          1.0 / (focal.fy * focal.fy));
  result.residuals.focal = (focal_system.B * s - focal_system.y).norm();
  return result;
}

Matrix pairwise_distances(const Reconstruction& reconstruction) {
  const auto n = static_cast<Eigen::Index>(reconstruction.size());
  Matrix D = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = (reconstruction[static_cast<std::size_t>(i)].ankle -
                        reconstruction[static_cast<std::size_t>(j)].ankle)
                           .norm();
      D(i, j) = d;
      D(j, i) = d;
    }
  }
  return D;
}

Vec2 project(const CameraIntrinsics& intrinsics, const Vec3& X) {
  if (!(X.z() > 0.0)) {
    throw std::invalid_argument("cannot project a point behind the camera");
  }
  return {intrinsics.fx * X.x() / X.z(), intrinsics.fy * X.y() / X.z()};
}

std::optional<Vec3> back_project_to_plane(const CameraIntrinsics& intrinsics,
                                          const GroundPlane& plane,
                                          const Vec2& pixel) {
  const Vec3 ray(pixel.x() / intrinsics.fx, pixel.y() / intrinsics.fy, 1.0);
  const double denom = plane.normal.dot(ray);
  if (denom == 0.0) return std::nullopt;
  const double depth = -plane.rho / denom;
  if (!(depth > 0.0) || !std::isfinite(depth)) return std::nullopt;
  return depth * ray;
}

CameraIntrinsics with_image_geometry(CameraIntrinsics solved,
                                     const CameraIntrinsics& image) {
  solved.cx = image.cx;
  solved.cy = image.cy;
  solved.width = image.width;
  solved.height = image.height;
  return solved;
}

}  // namespace posedist
