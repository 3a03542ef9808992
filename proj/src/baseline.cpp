#include "posedist/baseline.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace posedist::baseline {
namespace {

Vec3 body_line(const PersonObservation& o) {
  return o.shoulder.homogeneous().cross(o.ankle.homogeneous());
}

}  // namespace

Vec3 vanishing_point_by_intersection(std::span<const PersonObservation> obs) {
  if (obs.size() < 2) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "vanishing point needs at least two people");
  }
  Matrix L(std::max<Eigen::Index>(3, static_cast<Eigen::Index>(obs.size())),
           3);
  L.setZero();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i].ankle.frame != Frame::kPrincipalCentered ||
        obs[i].shoulder.frame != Frame::kPrincipalCentered) {
      throw std::invalid_argument(
          "baseline expects principal-centered observations");
    }
    const Vec3 l = body_line(obs[i]);
    const double scale = l.head<2>().norm();
    if (!(scale > 0.0)) {
      throw EstimationFailure(FailureKind::kRankDeficient,
                              "degenerate body segment");
    }
    L.row(static_cast<Eigen::Index>(i)) = (l / scale).transpose();
  }
  Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(1) / s(0) < kRankTolerance) {
    throw EstimationFailure(FailureKind::kRankDeficient,
                            "body lines do not determine a vanishing point");
  }
  Vec3 p = svd.matrixV().col(2);
  for (int k = 2; k >= 0; --k) {
    if (p(k) != 0.0) {
      if (p(k) < 0.0) p = -p;
      break;
    }
  }
  return p;
}

HorizonLine horizon_by_fitting(std::span<const PersonObservation> obs) {
  if (obs.size() < 3) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "horizon fit needs at least three people");
  }
  std::vector<Vec2> points;
  points.reserve(obs.size() * (obs.size() - 1) / 2);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (std::size_t j = i + 1; j < obs.size(); ++j) {
      const Vec3 top_line =
          obs[i].shoulder.homogeneous().cross(obs[j].shoulder.homogeneous());
      const Vec3 bottom_line =
          obs[i].ankle.homogeneous().cross(obs[j].ankle.homogeneous());
      const Vec3 q = top_line.cross(bottom_line);
      if (std::abs(q.z()) <= kInfinityTolerance * q.norm() || q.z() == 0.0) {
        continue;
      }
      points.push_back(q.head<2>() / q.z());
    }
  }
  if (points.size() < 2) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "fewer than two finite horizon points");
  }
  Vec2 centroid = Vec2::Zero();
  for (const auto& q : points) centroid += q;
  centroid /= static_cast<double>(points.size());
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (const auto& q : points) {
    const Vec2 d = q - centroid;
    scatter += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(scatter);
  if (!(eig.eigenvalues()(1) > 0.0)) {
    throw EstimationFailure(FailureKind::kRankDeficient,
                            "horizon points coincide");
  }
  // Smallest eigenvalue first: its eigenvector is the line normal.
  const Vec2 n = eig.eigenvectors().col(0).normalized();
  return {Vec3(n.x(), n.y(), -n.dot(centroid))};
}

FocalLengths focal_from_pole_polar(const Vec3& p, const HorizonLine& horizon,
                                   bool fx_eq_fy) {
  const Vec3& l = horizon.l;
  if (std::abs(p.z()) <= kInfinityTolerance * p.norm()) {
    throw EstimationFailure(FailureKind::kRankDeficient,
                            "vanishing point at infinity");
  }
  if (l.z() == 0.0) {
    throw EstimationFailure(FailureKind::kRankDeficient,
                            "horizon passes through the principal point");
  }
  const auto ratio = [&](int k) { return p(k) * l.z() / (l(k) * p.z()); };
  if (fx_eq_fy) {
    double sum = 0.0;
    int count = 0;
    for (int k = 0; k < 2; ++k) {
      if (l(k) != 0.0) {
        sum += ratio(k);
        ++count;
      }
    }
    const double f2 = count > 0 ? sum / count : 0.0;
    if (!(f2 > 0.0)) {
      throw EstimationFailure(FailureKind::kNonPositiveFocal,
                              "pole-polar ratio is not positive");
    }
    return {std::sqrt(f2), std::sqrt(f2)};
  }
  if (l.x() == 0.0 || l.y() == 0.0) {
    throw EstimationFailure(FailureKind::kRankDeficient,
                            "horizon is axis-aligned; focal undetermined");
  }
  const double fx2 = ratio(0);
  const double fy2 = ratio(1);
  if (!(fx2 > 0.0) || !(fy2 > 0.0) || !std::isfinite(fx2) ||
      !std::isfinite(fy2)) {
    throw EstimationFailure(FailureKind::kNonPositiveFocal,
                            "pole-polar ratio is not positive");
  }
  return {std::sqrt(fx2), std::sqrt(fy2)};
}

CalibrationResult baseline_calibrate(std::span<const PersonObservation> obs,
                                     HeightPrior h, bool fx_eq_fy) {
  if (obs.size() < 3) {
    throw EstimationFailure(FailureKind::kInsufficientData,
                            "baseline needs at least three people");
  }
  const Vec3 p = vanishing_point_by_intersection(obs);
  const HorizonLine horizon = horizon_by_fitting(obs);
  const FocalLengths focal = focal_from_pole_polar(p, horizon, fx_eq_fy);
  const DepthPairs depths = solve_scaled_depths(obs, p, h);
  CalibrationResult result = complete_calibration(obs, p, depths, focal, h);
  result.residuals.vanishing = (build_vanishing_system(obs) * p).norm();
  return result;
}

}  // namespace posedist::baseline
