#include "posedist/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace posedist::io {
namespace {

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + ": expected a number");
  return j.get<double>();
}

ImageSize image_size_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    throw SchemaError(where + ": image_size must be [width, height]");
  }
  ImageSize s{j[0].get<int>(), j[1].get<int>()};
  if (s.width <= 0 || s.height <= 0) {
    throw SchemaError(where + ": image_size must be positive");
  }
  return s;
}

}  // namespace

ImageSize parse_image_size(const std::string& text) {
  const auto x = text.find_first_of("xX");
  ImageSize s;
  if (x == std::string::npos) throw SchemaError("image size must be WxH");
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto a = std::from_chars(begin, begin + x, s.width);
  const auto b = std::from_chars(begin + x + 1, end, s.height);
  if (a.ec != std::errc() || a.ptr != begin + x || b.ec != std::errc() ||
      b.ptr != end || s.width <= 0 || s.height <= 0) {
    throw SchemaError("image size must be WxH with positive integers");
  }
  return s;
}

std::vector<KeypointFrame> parse_keypoint_frames(const Json& doc) {
  if (!doc.is_array()) throw SchemaError("keypoint file must be a JSON array");
  std::vector<KeypointFrame> frames;
  frames.reserve(doc.size());
  for (std::size_t f = 0; f < doc.size(); ++f) {
    const Json& jf = doc[f];
    const std::string where = "frame " + std::to_string(f);
    if (!jf.is_object()) throw SchemaError(where + ": expected an object");
    KeypointFrame frame;
    if (!jf.contains("frame_id") || !jf["frame_id"].is_string()) {
      throw SchemaError(where + ": missing string frame_id");
    }
    frame.frame_id = jf["frame_id"].get<std::string>();
    if (jf.contains("image_size") && !jf["image_size"].is_null()) {
      frame.image_size = image_size_from_json(jf["image_size"], where);
    }
    if (!jf.contains("people") || !jf["people"].is_array()) {
      throw SchemaError(where + ": missing people array");
    }
    for (std::size_t p = 0; p < jf["people"].size(); ++p) {
      const Json& jp = jf["people"][p];
      const std::string pw = where + " person " + std::to_string(p);
      if (!jp.is_object() || !jp.contains("keypoints") ||
          !jp["keypoints"].is_array()) {
        throw SchemaError(pw + ": missing keypoints array");
      }
      const Json& kps = jp["keypoints"];
      if (kps.size() != kNumCocoJoints) {
        throw SchemaError(pw + ": expected 17 keypoints, got " +
                          std::to_string(kps.size()));
      }
      KeypointPerson person;
      for (std::size_t k = 0; k < kNumCocoJoints; ++k) {
        const Json& kp = kps[k];
        if (!kp.is_array() || kp.size() != 3) {
          throw SchemaError(pw + ": keypoint must be [u, v, conf]");
        }
        person.keypoints[k] = {number(kp[0], pw), number(kp[1], pw),
                               number(kp[2], pw)};
      }
      frame.people.push_back(person);
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

Json keypoint_frames_to_json(const std::vector<KeypointFrame>& frames) {
  Json doc = Json::array();
  for (const auto& f : frames) {
    Json jf;
    jf["frame_id"] = f.frame_id;
    if (f.image_size) {
      jf["image_size"] = {f.image_size->width, f.image_size->height};
    }
    jf["people"] = Json::array();
    for (const auto& p : f.people) {
      Json kps = Json::array();
      for (const auto& k : p.keypoints) kps.push_back({k.u, k.v, k.confidence});
      jf["people"].push_back({{"keypoints", kps}});
    }
    doc.push_back(std::move(jf));
  }
  return doc;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

Json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("cannot write " + path.string());
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const Json& doc) {
  write_text(path, dump(doc));
}

KeypointPerson skeleton_from_centers(const PersonObservation& raw,
                                     double half_width_px) {
  KeypointPerson p;
  for (auto& k : p.keypoints) k = {raw.shoulder.u, raw.shoulder.v, 0.0};
  const auto pair = [&](std::size_t left, std::size_t right,
                        const PixelPoint& c) {
    p.keypoints[left] = {c.u - half_width_px, c.v, 1.0};
    p.keypoints[right] = {c.u + half_width_px, c.v, 1.0};
  };
  pair(kLeftShoulder, kRightShoulder, raw.shoulder);
  pair(kLeftAnkle, kRightAnkle, raw.ankle);
  return p;
}

Ingest ingest_frames(const std::vector<KeypointFrame>& frames,
                     std::optional<ImageSize> fallback, double min_conf) {
  Ingest out;
  for (const auto& f : frames) {
    IngestedFrame frame;
    frame.frame_id = f.frame_id;
    if (f.image_size) {
      frame.image_size = *f.image_size;
    } else if (fallback) {
      frame.image_size = *fallback;
    } else {
      throw SchemaError("frame " + f.frame_id +
                        " has no image_size and none was given");
    }
    for (std::size_t i = 0; i < f.people.size(); ++i) {
      const CocoIngest got = centers_from_coco(f.people[i].keypoints, min_conf);
      if (got.person) {
        frame.people.push_back({i, *got.person});
      } else {
        out.warnings.push_back({f.frame_id, i, got.rejection});
      }
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw SchemaError("expected a 3-vector");
  }
  return {number(j[0], "vector"), number(j[1], "vector"),
          number(j[2], "vector")};
}

}  // namespace posedist::io
