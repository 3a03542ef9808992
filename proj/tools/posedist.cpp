// posedist: camera calibration and ground-plane distances from pose keypoints.

#include "posedist/commands.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace cli = posedist::cli;
namespace io = posedist::io;

namespace {

struct Common {
  std::string output;
  std::string image_size;
};

void emit(const io::Json& doc, const std::string& output) {
  if (output.empty() || output == "-") {
    std::cout << io::dump(doc);
  } else {
    io::write_json(output, doc);
  }
}

void add_calibration_flags(CLI::App* app, cli::RunManifest& m) {
  app->add_option("--height-m", m.height_m,
                  "Ankle-center to shoulder-center height in meters")
      ->check(CLI::PositiveNumber);
  app->add_flag("--fx-eq-fy", m.fx_eq_fy, "Assume square pixels");
  app->add_flag("--ransac,!--no-ransac", m.ransac,
                "Robust estimation (default on)");
  app->add_option("--inlier-px", m.ransac_config.inlier_threshold_px,
                  "RANSAC inlier threshold in pixels")
      ->check(CLI::PositiveNumber);
  app->add_option("--seed", m.seed, "RANSAC seed");
  app->add_flag("--distortion", m.distortion,
                "Jointly estimate a division-model distortion");
}

void add_ingest_flags(CLI::App* app, cli::RunManifest& m, Common& c) {
  app->add_option("--min-conf", m.min_conf, "Keypoint confidence threshold");
  app->add_option("--image-size", c.image_size,
                  "WxH for frames without an image_size field");
}

int run(int argc, char** argv) {
  CLI::App app{"Camera calibration and social distances from pose keypoints"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);

  cli::RunManifest m;
  Common common;
  std::string csv_out = "study.csv";
  std::string manifest_out;
  std::string table_out;
  std::string artifact;
  std::string truth_out;
  posedist::sim::SceneConfig scene;
  int frames = 1;

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate from keypoint files");
  calibrate->add_option("keypoints", m.inputs, "Keypoint JSON files")->required();
  add_calibration_flags(calibrate, m);
  add_ingest_flags(calibrate, m, common);
  calibrate->add_option("-o,--output", common.output, "Calibration JSON");

  std::string kp_file;
  std::string calib_file;
  auto* dist = app.add_subcommand("distances", "Pairwise ground distances");
  dist->add_option("keypoints", kp_file, "Keypoint JSON")->required();
  dist->add_option("calibration", calib_file, "Calibration JSON")->required();
  dist->add_option("--threshold-m", m.threshold_m,
                   "Flag people closer than this to their nearest neighbor");
  dist->add_flag_callback("--six-feet",
                          [&] { m.threshold_m = cli::kSixFeetM; },
                          "Shorthand for --threshold-m 1.8288");
  add_ingest_flags(dist, m, common);
  dist->add_option("-o,--output", common.output, "Distance report JSON");

  std::string report_file;
  std::string labels_file;
  auto* eval = app.add_subcommand("evaluate", "Score distance bins against labels");
  eval->add_option("report", report_file, "Distance report JSON")->required();
  eval->add_option("labels", labels_file, "Labeled pairs JSON")->required();
  eval->add_option("-o,--output", common.output, "Evaluation JSON");
  eval->add_option("--table", table_out, "Text table path (default stderr)");

  auto* grid = app.add_subcommand("grid", "Ground-plane grid overlay");
  grid->add_option("calibration", calib_file, "Calibration JSON")->required();
  grid->add_option("--cell-m", m.cell_m, "Grid cell size in meters")
      ->check(CLI::PositiveNumber);
  grid->add_option("--extent-m", m.extent_m, "Grid extent in meters")
      ->check(CLI::NonNegativeNumber);
  grid->add_option("-o,--output", common.output, "Overlay JSON");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study tables");
  simulate->add_option("study", m.study, "noisefree|noise|height|count|distortion")
      ->required();
  simulate->add_option("--trials", m.trials, "Trials per configuration")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--seed", m.seed, "Master seed");
  simulate->add_option("-o,--output", csv_out, "CSV path");
  simulate->add_option("--manifest", manifest_out,
                       "Manifest path (default: CSV path + .manifest.json)");
  m.trials = 500;

  auto* synth = app.add_subcommand("synth", "Write a synthetic keypoint file");
  synth->add_option("--people", scene.person_count, "People in the scene")
      ->check(CLI::PositiveNumber);
  synth->add_option("--frames", frames, "Frames to spread them over")
      ->check(CLI::PositiveNumber);
  synth->add_option("--noise-px", scene.noise_std, "Pixel noise std")
      ->check(CLI::NonNegativeNumber);
  synth->add_option("--height-m", scene.height_mean, "Person height h");
  synth->add_option("--seed", m.seed, "Seed");
  synth->add_option("-o,--output", common.output, "Keypoint JSON")->required();
  synth->add_option("--truth", truth_out, "Ground-truth JSON");

  auto* rerun = app.add_subcommand("rerun", "Reproduce an artifact from its manifest");
  rerun->add_option("artifact", artifact, "Artifact JSON with a manifest")->required();
  rerun->add_option("-o,--output", common.output, "Output path");
  rerun->add_option("--csv", csv_out, "CSV path for simulate manifests");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitSchema;
  }

  if (!common.image_size.empty()) {
    m.image_size = io::parse_image_size(common.image_size);
  }

  if (*calibrate) {
    m.command = "calibrate";
    emit(cli::cmd_calibrate(m), common.output);
  } else if (*dist) {
    m.command = "distances";
    m.inputs = {kp_file, calib_file};
    emit(cli::cmd_distances(m), common.output);
  } else if (*eval) {
    m.command = "evaluate";
    m.inputs = {report_file, labels_file};
    const io::Json doc = cli::cmd_evaluate(m);
    emit(doc, common.output);
    const auto report = cli::evaluate(io::read_json(report_file),
                                      cli::parse_labels(io::read_json(labels_file)));
    if (table_out.empty()) {
      std::cerr << cli::format_table(report);
    } else {
      io::write_text(table_out, cli::format_table(report));
    }
  } else if (*grid) {
    m.command = "grid";
    m.inputs = {calib_file};
    const io::Json doc = cli::cmd_grid(m);
    for (const auto& w : doc["warnings"]) {
      std::cerr << "warning: " << w.get<std::string>() << '\n';
    }
    emit(doc, common.output);
  } else if (*simulate) {
    m.command = "simulate";
    const auto out = cli::cmd_simulate(m);
    io::write_text(csv_out, out.csv);
    io::write_json(manifest_out.empty() ? csv_out + ".manifest.json" : manifest_out,
                   out.manifest_doc);
  } else if (*synth) {
    const auto cap = cli::synthesize_capture(scene, frames, m.seed);
    io::write_json(common.output, io::keypoint_frames_to_json(cap.frames));
    if (!truth_out.empty()) io::write_json(truth_out, cap.truth);
  } else if (*rerun) {
    const io::Json doc = io::read_json(artifact);
    const auto manifest = cli::manifest_from_json(doc.at("manifest"));
    if (manifest.command == "simulate") {
      const auto out = cli::cmd_simulate(manifest);
      io::write_text(csv_out, out.csv);
      emit(out.manifest_doc, common.output);
    } else {
      emit(cli::rerun(doc), common.output);
    }
  }
  return cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const posedist::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return cli::kExitSchema;
  } catch (const posedist::EstimationFailure& e) {
    std::cerr << "estimation failed (" << posedist::to_string(e.kind())
              << "): " << e.what() << '\n';
    return cli::kExitEstimation;
  } catch (const io::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return cli::kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return cli::kExitSchema;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
