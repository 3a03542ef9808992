#pragma once

// File formats: COCO keypoint frames and small JSON/text helpers.

#include "posedist/core.hpp"
#include "posedist/solver.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace posedist::io {

using Json = nlohmann::json;

/// Unreadable or unwritable files.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

struct KeypointPerson {
  std::array<Keypoint, kNumCocoJoints> keypoints{};
};

struct KeypointFrame {
  std::string frame_id;
  std::optional<ImageSize> image_size;
  std::vector<KeypointPerson> people;
};

/// Parses "WxH". Throws SchemaError.
ImageSize parse_image_size(const std::string& text);

/// Keypoint file: [{"frame_id": str, "image_size": [W, H]?, "people":
/// [{"keypoints": [[u, v, conf] x 17]}]}]. Throws SchemaError.
std::vector<KeypointFrame> parse_keypoint_frames(const Json& doc);
Json keypoint_frames_to_json(const std::vector<KeypointFrame>& frames);

Json read_json(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& doc);

/// Canonical serialization used for every artifact (sorted keys, 2-space
/// indent, shortest round-trip doubles).
std::string dump(const Json& doc);

/// Synthetic 17-joint skeleton whose shoulder and ankle centers are the given
/// raw-image points. Joints the solver never reads get zero confidence.
KeypointPerson skeleton_from_centers(const PersonObservation& raw,
                                     double half_width_px = 8.0);

struct IngestedPerson {
  std::size_t index = 0;  // position in the frame's people array
  PersonObservation raw;
};

struct IngestWarning {
  std::string frame_id;
  std::size_t person = 0;
  std::string reason;
};

struct IngestedFrame {
  std::string frame_id;
  ImageSize image_size;
  std::vector<IngestedPerson> people;
};

struct Ingest {
  std::vector<IngestedFrame> frames;
  std::vector<IngestWarning> warnings;
};

/// Runs the confidence-gated center extraction on every person. Frames
/// without an image size take `fallback`; if neither exists a SchemaError is
/// thrown.
Ingest ingest_frames(const std::vector<KeypointFrame>& frames,
                     std::optional<ImageSize> fallback, double min_conf);

Json to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);

}  // namespace posedist::io
