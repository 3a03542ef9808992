#include "posedist/core.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace posedist {

Mat3 CameraIntrinsics::K() const {
  return Vec3(fx, fy, 1.0).asDiagonal();
}

Mat3 CameraIntrinsics::K_inv() const {
  return Vec3(1.0 / fx, 1.0 / fy, 1.0).asDiagonal();
}

Mat3 CameraIntrinsics::W() const {
  return Vec3(1.0 / (fx * fx), 1.0 / (fy * fy), 1.0).asDiagonal();
}

CameraIntrinsics CameraIntrinsics::centered(double fx, double fy,
                                            double width, double height) {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("focal lengths must be positive");
  }
  return {fx, fy, width / 2.0, height / 2.0, width, height};
}

HeightPrior::HeightPrior(double meters) : h(meters) {
  if (!(meters > 0.0) || !std::isfinite(meters)) {
    throw std::invalid_argument("height prior must be positive");
  }
}

DistanceBin classify_distance(double meters) {
  if (!(meters >= 0.0)) {
    throw std::invalid_argument("distance must be non-negative");
  }
  if (meters < 1.0) return DistanceBin::kB0_1;
  if (meters < 2.0) return DistanceBin::kB1_2;
  if (meters < 4.0) return DistanceBin::kB2_4;
  return DistanceBin::kB4_Inf;
}

std::string_view to_string(DistanceBin bin) {
  switch (bin) {
    case DistanceBin::kB0_1:
      return "B0_1";
    case DistanceBin::kB1_2:
      return "B1_2";
    case DistanceBin::kB2_4:
      return "B2_4";
    case DistanceBin::kB4_Inf:
      return "B4_INF";
  }
  return "?";
}

DistanceBin distance_bin_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kNumDistanceBins; ++i) {
    const auto bin = static_cast<DistanceBin>(i);
    if (to_string(bin) == name) return bin;
  }
  throw SchemaError("unknown distance bin '" + std::string(name) + "'");
}

std::string_view to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::kInsufficientData:
      return "insufficient_data";
    case FailureKind::kRankDeficient:
      return "rank_deficient";
    case FailureKind::kNonPositiveFocal:
      return "non_positive_focal";
    case FailureKind::kCheirality:
      return "cheirality";
    case FailureKind::kNoValidEigenpair:
      return "no_valid_eigenpair";
  }
  return "unknown";
}

EstimationFailure::EstimationFailure(FailureKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

PixelPoint to_principal_centered(const PixelPoint& p,
                                 const CameraIntrinsics& intrinsics) {
  if (p.frame != Frame::kRawImage) {
    throw std::invalid_argument("expected a raw-image point");
  }
  return {p.u - intrinsics.cx, p.v - intrinsics.cy, Frame::kPrincipalCentered};
}

PixelPoint to_raw_image(const PixelPoint& p,
                        const CameraIntrinsics& intrinsics) {
  if (p.frame != Frame::kPrincipalCentered) {
    throw std::invalid_argument("expected a principal-centered point");
  }
  return {p.u + intrinsics.cx, p.v + intrinsics.cy, Frame::kRawImage};
}

PersonObservation to_principal_centered(const PersonObservation& obs,
                                        const CameraIntrinsics& intrinsics) {
  return {to_principal_centered(obs.ankle, intrinsics),
          to_principal_centered(obs.shoulder, intrinsics)};
}

Observations to_principal_centered(std::span<const PersonObservation> obs,
                                   const CameraIntrinsics& intrinsics) {
  Observations out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back(to_principal_centered(o, intrinsics));
  return out;
}

bool inside_image(const PixelPoint& p, const CameraIntrinsics& intrinsics) {
  const PixelPoint raw = p.frame == Frame::kRawImage
                             ? p
                             : to_raw_image(p, intrinsics);
  return raw.u >= 0.0 && raw.u < intrinsics.width && raw.v >= 0.0 &&
         raw.v < intrinsics.height;
}

std::string_view coco_joint_name(std::size_t joint) {
  static constexpr std::array<std::string_view, kNumCocoJoints> kNames = {
      "nose",           "left_eye",      "right_eye",      "left_ear",
      "right_ear",      "left_shoulder", "right_shoulder", "left_elbow",
      "right_elbow",    "left_wrist",    "right_wrist",    "left_hip",
      "right_hip",      "left_knee",     "right_knee",     "left_ankle",
      "right_ankle"};
  if (joint >= kNumCocoJoints) throw std::out_of_range("COCO joint index");
  return kNames[joint];
}

CocoIngest centers_from_coco(std::span<const Keypoint> keypoints,
                             double min_conf) {
  if (keypoints.size() != kNumCocoJoints) {
    throw SchemaError("expected 17 COCO keypoints, got " +
                      std::to_string(keypoints.size()));
  }
  for (const auto& k : keypoints) {
    if (!std::isfinite(k.u) || !std::isfinite(k.v) ||
        !std::isfinite(k.confidence)) {
      throw SchemaError("non-finite keypoint value");
    }
  }
  for (const std::size_t joint :
       {kLeftAnkle, kRightAnkle, kLeftShoulder, kRightShoulder}) {
    if (keypoints[joint].confidence < min_conf) {
      return {std::nullopt,
              std::string(coco_joint_name(joint)) + " below confidence"};
    }
  }
  const auto mid = [&](std::size_t a, std::size_t b) {
    return PixelPoint{0.5 * (keypoints[a].u + keypoints[b].u),
                      0.5 * (keypoints[a].v + keypoints[b].v),
                      Frame::kRawImage};
  };
  PersonObservation obs{mid(kLeftAnkle, kRightAnkle),
                        mid(kLeftShoulder, kRightShoulder)};
  if (obs.ankle.u == obs.shoulder.u && obs.ankle.v == obs.shoulder.v) {
    return {std::nullopt, "zero-length ankle-shoulder segment"};
  }
  return {obs, {}};
}

double focal_error(double f_hat, double f_true) {
  if (!(f_true > 0.0)) {
    throw std::invalid_argument("true focal length must be positive");
  }
  return std::abs(f_hat - f_true) / f_true * 100.0;
}

double normal_error(const Vec3& n_hat, const Vec3& n_true) {
  constexpr double kUnitTolerance = 1e-6;
  if (std::abs(n_hat.norm() - 1.0) > kUnitTolerance ||
      std::abs(n_true.norm() - 1.0) > kUnitTolerance) {
    throw std::invalid_argument("normals must be unit vectors");
  }
  // atan2 form keeps full precision near zero, where acos does not.
  const double angle =
      std::atan2(n_hat.cross(n_true).norm(), n_hat.dot(n_true));
  return angle * 180.0 / std::numbers::pi;
}

double rho_error(double rho_hat, double rho_true) {
  if (!(rho_true > 0.0)) {
    throw std::invalid_argument("true plane offset must be positive");
  }
  return std::abs(rho_hat - rho_true) / rho_true * 100.0;
}

double reconstruction_error(const Vec3& x_hat, const Vec3& x_true) {
  const double n = x_true.norm();
  if (!(n > 0.0)) {
    throw std::invalid_argument("true point must not be the camera center");
  }
  return (x_hat - x_true).norm() / n * 100.0;
}

double mean_reconstruction_error(std::span<const Vec3> x_hat,
                                 std::span<const Vec3> x_true) {
  if (x_hat.size() != x_true.size() || x_hat.empty()) {
    throw std::invalid_argument("point lists must be non-empty and aligned");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < x_hat.size(); ++i) {
    sum += reconstruction_error(x_hat[i], x_true[i]);
  }
  return sum / static_cast<double>(x_hat.size());
}

}  // namespace posedist
