#include "posedist/baseline.hpp"
#include "posedist/distortion.hpp"
#include "posedist/robust.hpp"
#include "posedist/sim.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace posedist;

namespace {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct PyCalibration {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  Vec3 normal = Vec3::UnitZ();
  double rho = 0;
  double mu = 0;
  double distortion_k = 0;
  Points3 ankles;
  Points3 shoulders;
  std::vector<bool> inliers;

  CameraIntrinsics intrinsics() const {
    return {fx, fy, cx, cy, static_cast<double>(width),
            static_cast<double>(height)};
  }
};

Observations centered_observations(const Points& ankles, const Points& shoulders,
                                   const CameraIntrinsics& image) {
  if (ankles.rows() != shoulders.rows()) {
    throw std::invalid_argument("ankles and shoulders must have the same length");
  }
  Observations obs;
  for (Eigen::Index i = 0; i < ankles.rows(); ++i) {
    obs.push_back(to_principal_centered(
        PersonObservation{{ankles(i, 0), ankles(i, 1)},
                          {shoulders(i, 0), shoulders(i, 1)}},
        image));
  }
  return obs;
}

PyCalibration calibrate(const Points& ankles, const Points& shoulders,
                        std::pair<int, int> image_size, double height_m,
                        bool fx_eq_fy, const std::string& method,
                        std::uint64_t seed, double inlier_px) {
  const auto image = CameraIntrinsics::centered(1, 1, image_size.first,
                                                image_size.second);
  const Observations obs = centered_observations(ankles, shoulders, image);
  const HeightPrior h(height_m);
  CalibrationResult r;
  PyCalibration out;
  out.inliers.assign(obs.size(), true);
  if (method == "batch") {
    r = calibrate_batch(obs, h, fx_eq_fy);
  } else if (method == "baseline") {
    r = baseline::baseline_calibrate(obs, h, fx_eq_fy);
  } else if (method == "ransac") {
    robust::RansacConfig config;
    config.rng_seed = seed;
    config.inlier_threshold_px = inlier_px;
    auto rr = robust::ransac_calibrate(obs, h, config, fx_eq_fy);
    r = rr.calibration;
    out.inliers = rr.inliers;
  } else if (method == "distortion") {
    auto d = distortion::distorted_calibrate(obs, h, fx_eq_fy);
    r = d.calibration;
    out.distortion_k = d.model.k;
  } else {
    throw std::invalid_argument("method must be batch, ransac, baseline or distortion");
  }
  out.fx = r.intrinsics.fx;
  out.fy = r.intrinsics.fy;
  out.cx = image.cx;
  out.cy = image.cy;
  out.width = image_size.first;
  out.height = image_size.second;
  out.normal = r.plane.normal;
  out.rho = r.plane.rho;
  out.mu = r.mu;
  out.ankles.resize(static_cast<Eigen::Index>(r.reconstruction.size()), 3);
  out.shoulders.resize(out.ankles.rows(), 3);
  for (std::size_t i = 0; i < r.reconstruction.size(); ++i) {
    out.ankles.row(static_cast<Eigen::Index>(i)) = r.reconstruction[i].ankle;
    out.shoulders.row(static_cast<Eigen::Index>(i)) = r.reconstruction[i].shoulder;
  }
  return out;
}

Eigen::MatrixXd ground_distances(const PyCalibration& c, const Points& ankles) {
  const CameraIntrinsics K = c.intrinsics();
  const GroundPlane plane{c.normal, c.rho};
  Reconstruction rec;
  for (Eigen::Index i = 0; i < ankles.rows(); ++i) {
    PixelPoint p = to_principal_centered(PixelPoint{ankles(i, 0), ankles(i, 1)}, K);
    if (c.distortion_k != 0.0) p = distortion::undistort_division(p, c.distortion_k);
    const auto X = back_project_to_plane(K, plane, p.xy());
    if (!X) throw std::invalid_argument("ankle ray misses the ground plane");
    PersonReconstruction r;
    r.ankle = *X;
    rec.push_back(r);
  }
  return pairwise_distances(rec);
}

std::string run_study(const std::string& name, int trials, std::uint64_t seed) {
  const auto study = sim::study_from_string(name);
  if (!study) throw std::invalid_argument("unknown study '" + name + "'");
  std::vector<sim::StudyRow> rows;
  {
    py::gil_scoped_release release;
    rows = sim::run_study(*study, trials, seed);
  }
  std::ostringstream os;
  sim::write_csv_header(os);
  sim::write_csv_rows(os, rows);
  return os.str();
}

py::dict simulate_scene(int people, std::uint64_t seed, double noise_px,
                        int width, int height, double fov_deg) {
  sim::SceneConfig config;
  config.person_count = people;
  config.noise_std = noise_px;
  config.width = width;
  config.height = height;
  config.fov_deg = fov_deg;
  sim::Rng rng(seed);
  const auto scene = sim::sample_scene(config, rng);
  const auto obs = sim::project_scene(scene, noise_px, {}, rng);
  Points ankles(people, 2), shoulders(people, 2);
  Points3 ankles3(people, 3);
  for (int i = 0; i < people; ++i) {
    const auto a = to_raw_image(obs[i].ankle, scene.intrinsics);
    const auto s = to_raw_image(obs[i].shoulder, scene.intrinsics);
    ankles.row(i) << a.u, a.v;
    shoulders.row(i) << s.u, s.v;
    ankles3.row(i) = scene.ankles[i];
  }
  py::dict d;
  d["ankles"] = ankles;
  d["shoulders"] = shoulders;
  d["ankles_3d"] = ankles3;
  d["fx"] = scene.intrinsics.fx;
  d["fy"] = scene.intrinsics.fy;
  d["normal"] = scene.plane.normal;
  d["rho"] = scene.plane.rho;
  d["height_m"] = config.height_mean;
  d["image_size"] = py::make_tuple(width, height);
  return d;
}

}  // namespace

PYBIND11_MODULE(_posedist, m) {
  m.doc() = "Camera calibration and ground-plane distances from pose keypoints";

  py::register_exception<EstimationFailure>(m, "EstimationFailure",
                                           PyExc_RuntimeError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);

  py::class_<PyCalibration>(m, "Calibration")
      .def_readonly("fx", &PyCalibration::fx)
      .def_readonly("fy", &PyCalibration::fy)
      .def_readonly("cx", &PyCalibration::cx)
      .def_readonly("cy", &PyCalibration::cy)
      .def_readonly("width", &PyCalibration::width)
      .def_readonly("height", &PyCalibration::height)
      .def_readonly("normal", &PyCalibration::normal)
      .def_readonly("rho", &PyCalibration::rho)
      .def_readonly("mu", &PyCalibration::mu)
      .def_readonly("distortion_k", &PyCalibration::distortion_k)
      .def_readonly("ankles", &PyCalibration::ankles)
      .def_readonly("shoulders", &PyCalibration::shoulders)
      .def_readonly("inliers", &PyCalibration::inliers)
      .def("__repr__", [](const PyCalibration& c) {
        std::ostringstream os;
        os << "Calibration(fx=" << c.fx << ", fy=" << c.fy << ", rho=" << c.rho
           << ")";
        return os.str();
      });

  m.def("calibrate", &calibrate, py::arg("ankles"), py::arg("shoulders"),
        py::arg("image_size"), py::arg("height_m") = 1.4,
        py::arg("fx_eq_fy") = false, py::arg("method") = "batch",
        py::arg("seed") = 0, py::arg("inlier_px") = 5.0,
        "Calibrate from (N, 2) raw-pixel ankle and shoulder centers.");
  m.def("ground_distances", &ground_distances, py::arg("calibration"),
        py::arg("ankles"),
        "Pairwise ground distances in meters between raw-pixel ankle centers.");
  m.def("classify_distance",
        [](double d) { return std::string(to_string(classify_distance(d))); },
        py::arg("meters"));
  m.def("ransac_iterations", &robust::ransac_iterations, py::arg("confidence"),
        py::arg("inlier_ratio"), py::arg("min_samples"));
  m.def("run_study", &run_study, py::arg("study"), py::arg("trials"),
        py::arg("seed") = 0, "Run a Monte Carlo study and return CSV text.");
  m.def("simulate_scene", &simulate_scene, py::arg("people"), py::arg("seed") = 0,
        py::arg("noise_px") = 0.0, py::arg("width") = 1920,
        py::arg("height") = 1080, py::arg("fov_deg") = 90.0,
        "Sample a synthetic scene; keypoints are in raw pixels.");
}
