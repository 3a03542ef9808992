#pragma once

// Subcommand implementations behind the posedist tool. Each command returns
// its artifact as JSON with the run manifest embedded under "manifest".

#include "posedist/core.hpp"
#include "posedist/io.hpp"
#include "posedist/robust.hpp"
#include "posedist/sim.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace posedist::cli {

using io::Json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr double kSixFeetM = 1.8288;

enum ExitCode : int {
  kExitOk = 0,
  kExitSchema = 2,
  kExitEstimation = 3,
  kExitIo = 4,
};

/// Everything needed to reproduce an artifact. Fields a command does not use
/// keep their defaults.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  double height_m = 1.4;
  bool fx_eq_fy = false;
  bool ransac = true;
  robust::RansacConfig ransac_config;
  bool distortion = false;
  std::uint64_t seed = 0;
  double min_conf = kDefaultMinConfidence;
  std::optional<io::ImageSize> image_size;
  std::optional<double> threshold_m;
  double cell_m = 2.0;
  double extent_m = 20.0;
  std::string study;
  int trials = 0;
  std::string tool_version = kToolVersion;
};

Json to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

// ---------------------------------------------------------------------------
// calibrate

struct Calibration {
  CameraIntrinsics intrinsics;
  GroundPlane plane;
  double distortion_k = 0.0;
};

Json calibration_to_json(const Calibration& c);
Calibration calibration_from_json(const Json& j);

/// Batch (or RANSAC) calibration over every person of every frame. All frames
/// must share one image size.
Json calibrate(const std::vector<io::KeypointFrame>& frames,
               const RunManifest& manifest);
Json cmd_calibrate(const RunManifest& manifest);

// ---------------------------------------------------------------------------
// distances

Json distances(const std::vector<io::KeypointFrame>& frames,
               const Calibration& calibration, const RunManifest& manifest);
/// inputs = {keypoint file, calibration file}.
Json cmd_distances(const RunManifest& manifest);

// ---------------------------------------------------------------------------
// evaluate

struct LabeledPair {
  std::string frame_id;
  std::size_t i = 0;
  std::size_t j = 0;
  DistanceBin label = DistanceBin::kB0_1;
};

std::vector<LabeledPair> parse_labels(const Json& doc);
Json labels_to_json(const std::vector<LabeledPair>& labels);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvaluationReport {
  // confusion[truth][prediction]
  std::array<std::array<std::size_t, kNumDistanceBins>, kNumDistanceBins>
      confusion{};
  std::array<ClassScores, kNumDistanceBins> classes{};
  double accuracy = 0.0;
  std::size_t total = 0;
  std::vector<LabeledPair> unmatched;
};

EvaluationReport evaluate(const Json& distance_report,
                          const std::vector<LabeledPair>& labels);
Json to_json(const EvaluationReport& r);
std::string format_table(const EvaluationReport& r);
/// inputs = {distance report, labels file}.
Json cmd_evaluate(const RunManifest& manifest);

// ---------------------------------------------------------------------------
// grid

struct GridLine {
  int family = 0;  // 0: runs along e1, 1: runs along e2
  double offset_m = 0.0;
  std::vector<std::vector<Vec2>> polylines;  // raw-image pixels
};

struct GridOverlay {
  Vec3 origin = Vec3::Zero();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitZ();
  std::vector<GridLine> lines;
  std::vector<std::string> warnings;
};

/// Lines every cell_m across [-extent/2, extent/2] in both directions,
/// centered at the camera footprint -rho N. Samples closer than near_m in
/// depth or outside the image are dropped, splitting the polyline.
GridOverlay make_grid(const Calibration& calibration, double cell_m,
                      double extent_m, int samples_per_line = 200,
                      double near_m = 0.1);
Json to_json(const GridOverlay& g);
/// inputs = {calibration file}.
Json cmd_grid(const RunManifest& manifest);

// ---------------------------------------------------------------------------
// simulate

struct SimulationOutput {
  std::string csv;
  Json manifest_doc;
};

SimulationOutput cmd_simulate(const RunManifest& manifest);

/// Synthetic keypoint file for a static camera: one scene split into frames.
struct SyntheticCapture {
  std::vector<io::KeypointFrame> frames;
  Json truth;  // camera, plane and per-frame ankle points and distances
};

SyntheticCapture synthesize_capture(const sim::SceneConfig& config,
                                    int frames, std::uint64_t seed);

// ---------------------------------------------------------------------------

/// Adds the manifest and a created_at timestamp to an artifact.
Json finalize(Json artifact, const RunManifest& manifest);

/// Re-executes the command recorded in an artifact's manifest.
Json rerun(const Json& artifact);

/// Drops volatile fields (created_at) for comparison.
Json strip_volatile(Json artifact);

}  // namespace posedist::cli
