#include "posedist/commands.hpp"

#include "posedist/distortion.hpp"
#include "posedist/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace posedist::cli {
namespace {

std::string utc_timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const Json& field(const Json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) {
    throw SchemaError(std::string("missing field '") + name + "'");
  }
  return j.at(name);
}

double number(const Json& j, const char* name) {
  const Json& v = field(j, name);
  if (!v.is_number()) {
    throw SchemaError(std::string("field '") + name + "' must be a number");
  }
  return v.get<double>();
}

void require_inputs(const RunManifest& m, std::size_t n) {
  if (m.inputs.size() != n) {
    throw SchemaError(m.command + " expects " + std::to_string(n) +
                      " input file(s)");
  }
}

CameraIntrinsics image_frame(const io::ImageSize& s) {
  return CameraIntrinsics::centered(1.0, 1.0, s.width, s.height);
}

Json warning_to_json(const io::IngestWarning& w) {
  return {{"frame_id", w.frame_id}, {"person", w.person}, {"reason", w.reason}};
}

}  // namespace

// ---------------------------------------------------------------------------
// Manifest.

Json to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["inputs"] = m.inputs;
  j["height_m"] = m.height_m;
  j["fx_eq_fy"] = m.fx_eq_fy;
  j["ransac"] = m.ransac;
  j["ransac_config"] = {
      {"confidence", m.ransac_config.confidence},
      {"inlier_ratio_prior", m.ransac_config.inlier_ratio_prior},
      {"min_samples", m.ransac_config.min_samples},
      {"inlier_threshold_px", m.ransac_config.inlier_threshold_px},
      {"max_iterations_cap", m.ransac_config.max_iterations_cap},
  };
  j["distortion"] = m.distortion;
  j["seed"] = m.seed;
  j["min_conf"] = m.min_conf;
  j["image_size"] = m.image_size
                        ? Json::array({m.image_size->width, m.image_size->height})
                        : Json(nullptr);
  j["threshold_m"] = m.threshold_m ? Json(*m.threshold_m) : Json(nullptr);
  j["cell_m"] = m.cell_m;
  j["extent_m"] = m.extent_m;
  j["study"] = m.study;
  j["trials"] = m.trials;
  j["tool_version"] = m.tool_version;
  return j;
}

RunManifest manifest_from_json(const Json& j) {
  try {
    RunManifest m;
    m.command = field(j, "command").get<std::string>();
    m.inputs = field(j, "inputs").get<std::vector<std::string>>();
    m.height_m = number(j, "height_m");
    m.fx_eq_fy = field(j, "fx_eq_fy").get<bool>();
    m.ransac = field(j, "ransac").get<bool>();
    const Json& rc = field(j, "ransac_config");
    m.ransac_config.confidence = number(rc, "confidence");
    m.ransac_config.inlier_ratio_prior = number(rc, "inlier_ratio_prior");
    m.ransac_config.min_samples = field(rc, "min_samples").get<int>();
    m.ransac_config.inlier_threshold_px = number(rc, "inlier_threshold_px");
    m.ransac_config.max_iterations_cap =
        field(rc, "max_iterations_cap").get<int>();
    m.distortion = field(j, "distortion").get<bool>();
    m.seed = field(j, "seed").get<std::uint64_t>();
    m.min_conf = number(j, "min_conf");
    const Json& size = field(j, "image_size");
    if (!size.is_null()) {
      m.image_size = io::ImageSize{size.at(0).get<int>(), size.at(1).get<int>()};
    }
    const Json& threshold = field(j, "threshold_m");
    if (!threshold.is_null()) m.threshold_m = threshold.get<double>();
    m.cell_m = number(j, "cell_m");
    m.extent_m = number(j, "extent_m");
    m.study = field(j, "study").get<std::string>();
    m.trials = field(j, "trials").get<int>();
    m.tool_version = field(j, "tool_version").get<std::string>();
    return m;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed manifest: ") + e.what());
  }
}

Json finalize(Json artifact, const RunManifest& manifest) {
  artifact["manifest"] = to_json(manifest);
  artifact["created_at"] = utc_timestamp();
  return artifact;
}

Json strip_volatile(Json artifact) {
  artifact.erase("created_at");
  return artifact;
}

// ---------------------------------------------------------------------------
// calibrate

Json calibration_to_json(const Calibration& c) {
  const auto& K = c.intrinsics;
  return {
      {"intrinsics",
       {{"fx", K.fx},
        {"fy", K.fy},
        {"cx", K.cx},
        {"cy", K.cy},
        {"width", K.width},
        {"height", K.height}}},
      {"plane", {{"normal", io::to_json(c.plane.normal)}, {"rho", c.plane.rho}}},
      {"distortion_k", c.distortion_k},
  };
}

Calibration calibration_from_json(const Json& j) {
  Calibration c;
  const Json& K = field(j, "intrinsics");
  c.intrinsics.fx = number(K, "fx");
  c.intrinsics.fy = number(K, "fy");
  c.intrinsics.cx = number(K, "cx");
  c.intrinsics.cy = number(K, "cy");
  c.intrinsics.width = number(K, "width");
  c.intrinsics.height = number(K, "height");
  const Json& plane = field(j, "plane");
  c.plane.normal = io::vec3_from_json(field(plane, "normal"));
  c.plane.rho = number(plane, "rho");
  if (j.contains("distortion_k")) c.distortion_k = number(j, "distortion_k");
  if (!(c.intrinsics.fx > 0.0) || !(c.intrinsics.fy > 0.0)) {
    throw SchemaError("calibration focal lengths must be positive");
  }
  if (std::abs(c.plane.normal.norm() - 1.0) > 1e-6) {
    throw SchemaError("calibration plane normal must be unit length");
  }
  return c;
}

Json calibrate(const std::vector<io::KeypointFrame>& frames,
               const RunManifest& manifest) {
  const io::Ingest ingest =
      io::ingest_frames(frames, manifest.image_size, manifest.min_conf);
  if (ingest.frames.empty()) throw SchemaError("no frames to calibrate from");
  const io::ImageSize size = ingest.frames.front().image_size;
  const CameraIntrinsics image = image_frame(size);

  Observations obs;
  std::vector<std::pair<std::string, std::size_t>> origin;
  for (const auto& f : ingest.frames) {
    if (f.image_size.width != size.width || f.image_size.height != size.height) {
      throw SchemaError("frames disagree on image size");
    }
    for (const auto& p : f.people) {
      obs.push_back(to_principal_centered(p.raw, image));
      origin.emplace_back(f.frame_id, p.index);
    }
  }

  const HeightPrior h(manifest.height_m);
  Json out;
  CalibrationResult result;
  Calibration calibration;
  std::vector<bool> inliers(obs.size(), true);
  if (manifest.distortion) {
    const auto d = distortion::distorted_calibrate(obs, h, manifest.fx_eq_fy);
    result = d.calibration;
    calibration.distortion_k = d.model.k;
    out["method"] = "distortion_batch";
  } else if (manifest.ransac) {
    if (obs.size() <= minimum_people(manifest.fx_eq_fy)) {
      throw EstimationFailure(FailureKind::kInsufficientData,
                              "too few people for RANSAC");
    }
    robust::RansacConfig config = manifest.ransac_config;
    config.rng_seed = manifest.seed;
    const auto r = robust::ransac_calibrate(obs, h, config, manifest.fx_eq_fy);
    result = r.calibration;
    inliers = r.inliers;
    out["method"] = "ransac";
    out["ransac_iterations"] = r.iterations;
  } else {
    result = calibrate_batch(obs, h, manifest.fx_eq_fy);
    out["method"] = "batch";
  }
  calibration.intrinsics = with_image_geometry(result.intrinsics, image);
  calibration.plane = result.plane;

  Json outliers = Json::array();
  std::size_t inlier_count = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (inliers[i]) {
      ++inlier_count;
    } else {
      outliers.push_back(
          {{"frame_id", origin[i].first}, {"person", origin[i].second}});
    }
  }
  out.update(calibration_to_json(calibration));
  out["mu"] = result.mu;
  out["residuals"] = {{"vanishing", result.residuals.vanishing},
                      {"focal", result.residuals.focal}};
  out["observation_count"] = obs.size();
  out["inlier_count"] = inlier_count;
  out["outliers"] = outliers;
  Json warnings = Json::array();
  for (const auto& w : ingest.warnings) warnings.push_back(warning_to_json(w));
  out["warnings"] = warnings;
  return out;
}

Json cmd_calibrate(const RunManifest& manifest) {
  if (manifest.inputs.empty()) {
    throw SchemaError("calibrate needs at least one keypoint file");
  }
  std::vector<io::KeypointFrame> frames;
  for (const auto& path : manifest.inputs) {
    auto more = io::parse_keypoint_frames(io::read_json(path));
    frames.insert(frames.end(), more.begin(), more.end());
  }
  return finalize(calibrate(frames, manifest), manifest);
}

// ---------------------------------------------------------------------------
// distances

Json distances(const std::vector<io::KeypointFrame>& frames,
               const Calibration& calibration, const RunManifest& manifest) {
  std::optional<io::ImageSize> fallback = manifest.image_size;
  if (!fallback && calibration.intrinsics.width > 0 &&
      calibration.intrinsics.height > 0) {
    fallback = io::ImageSize{static_cast<int>(calibration.intrinsics.width),
                             static_cast<int>(calibration.intrinsics.height)};
  }
  io::Ingest ingest = io::ingest_frames(frames, fallback, manifest.min_conf);

  Json out_frames = Json::array();
  Json warnings = Json::array();
  for (const auto& w : ingest.warnings) warnings.push_back(warning_to_json(w));

  for (const auto& f : ingest.frames) {
    CameraIntrinsics K = calibration.intrinsics;
    K.cx = 0.5 * f.image_size.width;
    K.cy = 0.5 * f.image_size.height;
    K.width = f.image_size.width;
    K.height = f.image_size.height;

    std::vector<std::size_t> index;
    std::vector<Vec3> ankles;
    for (const auto& p : f.people) {
      PixelPoint a = to_principal_centered(p.raw.ankle, K);
      try {
        if (calibration.distortion_k != 0.0) {
          a = distortion::undistort_division(a, calibration.distortion_k);
        }
      } catch (const std::invalid_argument&) {
        warnings.push_back({{"frame_id", f.frame_id},
                            {"person", p.index},
                            {"reason", "ankle outside the distortion domain"}});
        continue;
      }
      const auto X = back_project_to_plane(K, calibration.plane, a.xy());
      if (!X) {
        warnings.push_back({{"frame_id", f.frame_id},
                            {"person", p.index},
                            {"reason", "ankle ray misses the ground plane"}});
        continue;
      }
      index.push_back(p.index);
      ankles.push_back(*X);
    }

    const std::size_t n = ankles.size();
    Json pairs = Json::array();
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> nearest_idx(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double d = (ankles[a] - ankles[b]).norm();
        pairs.push_back({{"i", index[a]},
                         {"j", index[b]},
                         {"distance_m", d},
                         {"bin", to_string(classify_distance(d))}});
        if (d < nearest[a]) {
          nearest[a] = d;
          nearest_idx[a] = index[b];
        }
        if (d < nearest[b]) {
          nearest[b] = d;
          nearest_idx[b] = index[a];
        }
      }
    }
    Json people = Json::array();
    for (std::size_t a = 0; a < n; ++a) {
      Json p = {{"index", index[a]}, {"ankle", io::to_json(ankles[a])}};
      if (n > 1) {
        p["nearest"] = {{"index", nearest_idx[a]}, {"distance_m", nearest[a]}};
        if (manifest.threshold_m) {
          p["unsafe"] = nearest[a] < *manifest.threshold_m;
        }
      } else {
        p["nearest"] = nullptr;
      }
      people.push_back(std::move(p));
    }
    out_frames.push_back(
        {{"frame_id", f.frame_id}, {"people", people}, {"pairs", pairs}});
  }
  Json out = {{"frames", out_frames}, {"warnings", warnings}};
  if (manifest.threshold_m) out["threshold_m"] = *manifest.threshold_m;
  return out;
}

Json cmd_distances(const RunManifest& manifest) {
  require_inputs(manifest, 2);
  const auto frames = io::parse_keypoint_frames(io::read_json(manifest.inputs[0]));
  const Calibration calibration =
      calibration_from_json(io::read_json(manifest.inputs[1]));
  return finalize(distances(frames, calibration, manifest), manifest);
}

// ---------------------------------------------------------------------------
// evaluate

std::vector<LabeledPair> parse_labels(const Json& doc) {
  if (!doc.is_array()) throw SchemaError("labels must be a JSON array");
  std::vector<LabeledPair> labels;
  for (const Json& j : doc) {
    try {
      LabeledPair l;
      l.frame_id = field(j, "frame_id").get<std::string>();
      l.i = field(j, "i").get<std::size_t>();
      l.j = field(j, "j").get<std::size_t>();
      l.label = distance_bin_from_string(field(j, "label").get<std::string>());
      if (l.i == l.j) throw SchemaError("label pairs a person with itself");
      labels.push_back(l);
    } catch (const Json::exception& e) {
      throw SchemaError(std::string("malformed label: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
  }
  return labels;
}

Json labels_to_json(const std::vector<LabeledPair>& labels) {
  Json doc = Json::array();
  for (const auto& l : labels) {
    doc.push_back({{"frame_id", l.frame_id},
                   {"i", l.i},
                   {"j", l.j},
                   {"label", to_string(l.label)}});
  }
  return doc;
}

EvaluationReport evaluate(const Json& distance_report,
                          const std::vector<LabeledPair>& labels) {
  std::map<std::tuple<std::string, std::size_t, std::size_t>, DistanceBin>
      predicted;
  try {
    for (const Json& f : field(distance_report, "frames")) {
      const auto id = field(f, "frame_id").get<std::string>();
      for (const Json& p : field(f, "pairs")) {
        auto i = field(p, "i").get<std::size_t>();
        auto j = field(p, "j").get<std::size_t>();
        if (i > j) std::swap(i, j);
        predicted[{id, i, j}] =
            distance_bin_from_string(field(p, "bin").get<std::string>());
      }
    }
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("malformed distance report: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }

  EvaluationReport r;
  for (const auto& l : labels) {
    const auto it = predicted.find(
        {l.frame_id, std::min(l.i, l.j), std::max(l.i, l.j)});
    if (it == predicted.end()) {
      r.unmatched.push_back(l);
      continue;
    }
    ++r.confusion[static_cast<std::size_t>(l.label)]
                 [static_cast<std::size_t>(it->second)];
    ++r.total;
  }
  std::size_t trace = 0;
  for (std::size_t c = 0; c < kNumDistanceBins; ++c) {
    std::size_t row = 0;
    std::size_t col = 0;
    for (std::size_t k = 0; k < kNumDistanceBins; ++k) {
      row += r.confusion[c][k];
      col += r.confusion[k][c];
    }
    const double tp = static_cast<double>(r.confusion[c][c]);
    trace += r.confusion[c][c];
    ClassScores& s = r.classes[c];
    s.support = row;
    s.precision = col > 0 ? tp / col : 0.0;
    s.recall = row > 0 ? tp / row : 0.0;
    s.f1 = s.precision + s.recall > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
  }
  r.accuracy = r.total > 0 ? static_cast<double>(trace) / r.total : 0.0;
  return r;
}

Json to_json(const EvaluationReport& r) {
  Json confusion = Json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  Json classes = Json::object();
  for (std::size_t c = 0; c < kNumDistanceBins; ++c) {
    const auto& s = r.classes[c];
    classes[std::string(to_string(static_cast<DistanceBin>(c)))] = {
        {"precision", s.precision},
        {"recall", s.recall},
        {"f1", s.f1},
        {"support", s.support}};
  }
  Json labels = Json::array();
  for (std::size_t c = 0; c < kNumDistanceBins; ++c) {
    labels.push_back(to_string(static_cast<DistanceBin>(c)));
  }
  return {{"labels", labels},
          {"confusion", confusion},
          {"classes", classes},
          {"accuracy", r.accuracy},
          {"total", r.total},
          {"unmatched", labels_to_json(r.unmatched)}};
}

std::string format_table(const EvaluationReport& r) {
  std::ostringstream os;
  os << "confusion (rows = truth, cols = prediction)\n";
  os << std::setw(8) << "";
  for (std::size_t c = 0; c < kNumDistanceBins; ++c) {
    os << std::setw(8) << to_string(static_cast<DistanceBin>(c));
  }
  os << '\n';
  for (std::size_t t = 0; t < kNumDistanceBins; ++t) {
    os << std::setw(8) << to_string(static_cast<DistanceBin>(t));
    for (std::size_t c = 0; c < kNumDistanceBins; ++c) {
      os << std::setw(8) << r.confusion[t][c];
    }
    os << '\n';
  }
  os << '\n'
     << std::setw(8) << "class" << std::setw(11) << "precision"
     << std::setw(8) << "recall" << std::setw(8) << "f1" << std::setw(9)
     << "support" << '\n';
  os << std::fixed << std::setprecision(3);
  for (std::size_t c = 0; c < kNumDistanceBins; ++c) {
    const auto& s = r.classes[c];
    os << std::setw(8) << to_string(static_cast<DistanceBin>(c))
       << std::setw(11) << s.precision << std::setw(8) << s.recall
       << std::setw(8) << s.f1 << std::setw(9) << s.support << '\n';
  }
  os << "\naccuracy " << r.accuracy << " over " << r.total << " pairs";
  if (!r.unmatched.empty()) os << ", " << r.unmatched.size() << " unmatched";
  os << '\n';
  return os.str();
}

Json cmd_evaluate(const RunManifest& manifest) {
  require_inputs(manifest, 2);
  const Json report = io::read_json(manifest.inputs[0]);
  const auto labels = parse_labels(io::read_json(manifest.inputs[1]));
  return finalize(to_json(evaluate(report, labels)), manifest);
}

// ---------------------------------------------------------------------------
// grid

GridOverlay make_grid(const Calibration& calibration, double cell_m,
                      double extent_m, int samples_per_line, double near_m) {
  if (!(cell_m > 0.0) || !(extent_m >= 0.0) || samples_per_line < 1) {
    throw std::invalid_argument("grid needs positive cell and extent");
  }
  const CameraIntrinsics& K = calibration.intrinsics;
  if (!(K.width > 0.0) || !(K.height > 0.0)) {
    throw SchemaError("calibration has no image size");
  }
  GridOverlay g;
  const Vec3& N = calibration.plane.normal;
  const Vec3 x_axis = Vec3::UnitX();
  const Vec3 projected = x_axis - N * N.dot(x_axis);
  if (!(calibration.plane.rho > 0.0) || projected.norm() < 1e-9) {
    g.warnings.emplace_back(
        "ground plane is degenerate for this camera; grid left empty");
    return g;
  }
  g.e1 = projected.normalized();
  g.e2 = N.cross(g.e1);
  g.origin = -calibration.plane.rho * N;

  const int count = static_cast<int>(std::floor(extent_m / cell_m + 1e-9)) + 1;
  const double first = -0.5 * (count - 1) * cell_m;
  const double half = 0.5 * extent_m;

  for (int family = 0; family < 2; ++family) {
    const Vec3& along = family == 0 ? g.e1 : g.e2;
    const Vec3& across = family == 0 ? g.e2 : g.e1;
    for (int k = 0; k < count; ++k) {
      GridLine line;
      line.family = family;
      line.offset_m = first + k * cell_m;
      std::vector<Vec2> run;
      const auto flush = [&] {
        if (run.size() >= 2) line.polylines.push_back(run);
        run.clear();
      };
      for (int s = 0; s <= samples_per_line; ++s) {
        const double t = -half + extent_m * s / samples_per_line;
        const Vec3 X = g.origin + line.offset_m * across + t * along;
        if (!(X.z() > near_m)) {
          flush();
          continue;
        }
        const Vec2 p = project(K, X);
        const PixelPoint raw =
            to_raw_image({p.x(), p.y(), Frame::kPrincipalCentered}, K);
        if (!inside_image(raw, K)) {
          flush();
          continue;
        }
        run.push_back(raw.xy());
      }
      flush();
      g.lines.push_back(std::move(line));
    }
  }
  return g;
}

Json to_json(const GridOverlay& g) {
  Json lines = Json::array();
  for (const auto& l : g.lines) {
    Json polylines = Json::array();
    for (const auto& run : l.polylines) {
      Json pts = Json::array();
      for (const auto& p : run) pts.push_back({p.x(), p.y()});
      polylines.push_back(std::move(pts));
    }
    lines.push_back({{"direction", l.family == 0 ? "e1" : "e2"},
                     {"offset_m", l.offset_m},
                     {"polylines", polylines}});
  }
  return {{"origin", io::to_json(g.origin)},
          {"e1", io::to_json(g.e1)},
          {"e2", io::to_json(g.e2)},
          {"lines", lines},
          {"warnings", g.warnings}};
}

Json cmd_grid(const RunManifest& manifest) {
  require_inputs(manifest, 1);
  const Calibration c = calibration_from_json(io::read_json(manifest.inputs[0]));
  Json out = to_json(make_grid(c, manifest.cell_m, manifest.extent_m));
  out["cell_m"] = manifest.cell_m;
  out["extent_m"] = manifest.extent_m;
  return finalize(out, manifest);
}

// ---------------------------------------------------------------------------
// simulate

SimulationOutput cmd_simulate(const RunManifest& manifest) {
  const auto study = sim::study_from_string(manifest.study);
  if (!study) throw SchemaError("unknown study '" + manifest.study + "'");
  if (manifest.trials < 1) throw SchemaError("trials must be positive");
  const auto rows = sim::run_study(*study, manifest.trials, manifest.seed);
  std::ostringstream os;
  sim::write_csv_header(os);
  sim::write_csv_rows(os, rows);
  SimulationOutput out;
  out.csv = os.str();
  out.manifest_doc = finalize({{"study", manifest.study},
                               {"rows", rows.size()}},
                              manifest);
  return out;
}

SyntheticCapture synthesize_capture(const sim::SceneConfig& config, int frames,
                                    std::uint64_t seed) {
  if (frames < 1) throw std::invalid_argument("need at least one frame");
  sim::Rng rng(seed);
  const sim::GroundTruthScene scene = sim::sample_scene(config, rng);
  const Observations obs =
      sim::project_scene(scene, config.noise_std, config.distortion, rng);
  const CameraIntrinsics& K = scene.intrinsics;

  SyntheticCapture cap;
  std::vector<std::vector<std::size_t>> members(frames);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    members[i % static_cast<std::size_t>(frames)].push_back(i);
  }
  Json truth_frames = Json::array();
  for (int f = 0; f < frames; ++f) {
    io::KeypointFrame frame;
    std::ostringstream id;
    id << "frame_" << std::setw(4) << std::setfill('0') << f;
    frame.frame_id = id.str();
    frame.image_size = io::ImageSize{static_cast<int>(K.width),
                                     static_cast<int>(K.height)};
    Json people = Json::array();
    Json pairs = Json::array();
    const auto& m = members[static_cast<std::size_t>(f)];
    for (const std::size_t i : m) {
      const PersonObservation raw{to_raw_image(obs[i].ankle, K),
                                  to_raw_image(obs[i].shoulder, K)};
      frame.people.push_back(io::skeleton_from_centers(raw));
      people.push_back({{"ankle", io::to_json(scene.ankles[i])},
                        {"shoulder", io::to_json(scene.shoulders[i])}});
    }
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        const double d = (scene.ankles[m[a]] - scene.ankles[m[b]]).norm();
        pairs.push_back({{"i", a},
                         {"j", b},
                         {"distance_m", d},
                         {"bin", to_string(classify_distance(d))}});
      }
    }
    truth_frames.push_back(
        {{"frame_id", frame.frame_id}, {"people", people}, {"pairs", pairs}});
    cap.frames.push_back(std::move(frame));
  }
  Calibration truth;
  truth.intrinsics = K;
  truth.plane = scene.plane;
  if (const auto* d = std::get_if<sim::DivisionDistortion>(&config.distortion)) {
    truth.distortion_k = d->k;
  }
  cap.truth = calibration_to_json(truth);
  cap.truth["height_m"] = config.height_mean;
  cap.truth["frames"] = truth_frames;
  return cap;
}

// ---------------------------------------------------------------------------

Json rerun(const Json& artifact) {
  const RunManifest m = manifest_from_json(field(artifact, "manifest"));
  if (m.command == "calibrate") return cmd_calibrate(m);
  if (m.command == "distances") return cmd_distances(m);
  if (m.command == "evaluate") return cmd_evaluate(m);
  if (m.command == "grid") return cmd_grid(m);
  if (m.command == "simulate") return cmd_simulate(m).manifest_doc;
  throw SchemaError("manifest names unknown command '" + m.command + "'");
}

}  // namespace posedist::cli
