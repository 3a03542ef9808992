#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace posedist {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Coordinate frame of a 2-D keypoint. Raw points live in image pixels with the
// origin at the top-left corner; principal-centered points have the principal
// point subtracted so that K = diag(fx, fy, 1).
enum class Frame { kRawImage, kPrincipalCentered };

struct PixelPoint {
  double u = 0.0;
  double v = 0.0;
  Frame frame = Frame::kRawImage;

  Vec2 xy() const { return {u, v}; }
  // Homogeneous representation [u, v, 1].
  Vec3 homogeneous() const { return {u, v, 1.0}; }
};

// One person's measurements: ankle center (bottom) and shoulder center (top).
struct PersonObservation {
  PixelPoint ankle;
  PixelPoint shoulder;
};

using Observations = std::vector<PersonObservation>;

/// Pinhole intrinsics with square-free focal lengths. The principal point is
/// carried so raw keypoints can be shifted; all solver math happens in the
/// principal-centered frame where K = diag(fx, fy, 1).
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  Mat3 K() const;
  Mat3 K_inv() const;
  // W = K^-T K^-1 = diag(1/fx^2, 1/fy^2, 1).
  Mat3 W() const;

  /// Intrinsics for a camera whose principal point sits at the image center.
  static CameraIntrinsics centered(double fx, double fy, double width,
                                   double height);
};

// Ground plane N^T X + rho = 0 in the camera frame; N points from the ground
// towards the shoulders and rho is the camera's distance to the plane.
struct GroundPlane {
  Vec3 normal = Vec3::UnitZ();
  double rho = 1.0;

  double signed_distance(const Vec3& X) const { return normal.dot(X) + rho; }
};

struct HeightPrior {
  double h = 1.4;

  explicit HeightPrior(double meters = 1.4);
};

struct PersonReconstruction {
  double depth_ankle = 0.0;
  double depth_shoulder = 0.0;
  Vec3 ankle = Vec3::Zero();
  Vec3 shoulder = Vec3::Zero();
};

using Reconstruction = std::vector<PersonReconstruction>;

enum class DistanceBin { kB0_1 = 0, kB1_2 = 1, kB2_4 = 2, kB4_Inf = 3 };
inline constexpr std::size_t kNumDistanceBins = 4;

DistanceBin classify_distance(double meters);
std::string_view to_string(DistanceBin bin);
DistanceBin distance_bin_from_string(std::string_view name);

/// Aggregate error statistics over Monte Carlo trials. Failed trials count
/// towards failure_rate only.
struct TrialStats {
  double fx_err = 0.0;      // percent
  double fy_err = 0.0;      // percent
  double normal_err = 0.0;  // degrees
  double rho_err = 0.0;     // percent
  double recon_err = 0.0;   // percent, mean over points
  double fx_err_std = 0.0;
  double fy_err_std = 0.0;
  double normal_err_std = 0.0;
  double rho_err_std = 0.0;
  double recon_err_std = 0.0;
  double failure_rate = 0.0;  // percent
  std::size_t trial_count = 0;
};

// ---------------------------------------------------------------------------
// Errors.

enum class FailureKind {
  kInsufficientData,
  kRankDeficient,
  kNonPositiveFocal,
  kCheirality,
  kNoValidEigenpair,
};

std::string_view to_string(FailureKind kind);

/// Raised whenever a configuration has no valid solution. The Monte Carlo
/// harness counts every kind uniformly as a failed trial.
class EstimationFailure : public std::runtime_error {
 public:
  EstimationFailure(FailureKind kind, const std::string& what);
  FailureKind kind() const noexcept { return kind_; }

 private:
  FailureKind kind_;
};

/// Malformed input records (keypoint files, labels, manifests).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Frame conversion.

PixelPoint to_principal_centered(const PixelPoint& p,
                                 const CameraIntrinsics& intrinsics);
PixelPoint to_raw_image(const PixelPoint& p,
                        const CameraIntrinsics& intrinsics);
PersonObservation to_principal_centered(const PersonObservation& obs,
                                        const CameraIntrinsics& intrinsics);
Observations to_principal_centered(std::span<const PersonObservation> obs,
                                   const CameraIntrinsics& intrinsics);

// True when a raw-image point lies in [0, width) x [0, height).
bool inside_image(const PixelPoint& p, const CameraIntrinsics& intrinsics);

// ---------------------------------------------------------------------------
// COCO keypoint ingestion.

enum CocoJoint : std::size_t {
  kNose = 0,
  kLeftEye,
  kRightEye,
  kLeftEar,
  kRightEar,
  kLeftShoulder,
  kRightShoulder,
  kLeftElbow,
  kRightElbow,
  kLeftWrist,
  kRightWrist,
  kLeftHip,
  kRightHip,
  kLeftKnee,
  kRightKnee,
  kLeftAnkle,
  kRightAnkle,
};
inline constexpr std::size_t kNumCocoJoints = 17;
std::string_view coco_joint_name(std::size_t joint);

struct Keypoint {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
};

struct CocoIngest {
  std::optional<PersonObservation> person;
  std::string rejection;  // empty when person is set
};

inline constexpr double kDefaultMinConfidence = 0.5;

// Ankle/shoulder centers from a 17-joint COCO skeleton in raw-image pixels.
// Throws SchemaError when the skeleton does not have 17 joints.
CocoIngest centers_from_coco(std::span<const Keypoint> keypoints,
                             double min_conf = kDefaultMinConfidence);

// ---------------------------------------------------------------------------
// Error metrics.

double focal_error(double f_hat, double f_true);
double normal_error(const Vec3& n_hat, const Vec3& n_true);
double rho_error(double rho_hat, double rho_true);
double reconstruction_error(const Vec3& x_hat, const Vec3& x_true);
double mean_reconstruction_error(std::span<const Vec3> x_hat,
                                 std::span<const Vec3> x_true);

}  // namespace posedist
