#include "posedist/sim.hpp"

#include "posedist/baseline.hpp"
#include "posedist/distortion.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <thread>

namespace posedist::sim {
namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr int kMaxPlacementAttempts = 5000;
constexpr int kMaxPoseAttempts = 1000;
constexpr int kMaxTruncationAttempts = 100000;

// Points closer than this to the image plane are not considered visible.
constexpr double kMinDepth = 0.1;

bool projects_inside(const CameraIntrinsics& K, const Vec3& X) {
  if (X.z() < kMinDepth) return false;
  const Vec2 p = project(K, X);
  return inside_image({p.x(), p.y(), Frame::kPrincipalCentered}, K);
}

bool reachable(const LensDistortion& distortion, const CameraIntrinsics& K,
               const Vec3& X) {
  const auto* div = std::get_if<DivisionDistortion>(&distortion);
  if (div == nullptr || div->k <= 0.0) return true;
  const double r2 = project(K, X).squaredNorm();
  // Stay clear of the fold at 4 k r^2 = 1.
  return 4.0 * div->k * r2 < 0.9;
}

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
  }
  double mean(std::size_t n) const { return n ? sum / double(n) : 0.0; }
  double stddev(std::size_t n) const {
    if (n < 2) return 0.0;
    const double m = mean(n);
    return std::sqrt(std::max(0.0, (sum_sq - double(n) * m * m) / double(n - 1)));
  }
};

}  // namespace

void SceneConfig::validate() const {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image size must be positive");
  }
  if (!(fov_deg >= 1.0 && fov_deg < 180.0)) {
    throw std::invalid_argument("vertical FOV must be in [1, 180) degrees");
  }
  if (person_count < 2) {
    throw std::invalid_argument("a scene needs at least two people");
  }
  if (!(noise_std >= 0.0)) {
    throw std::invalid_argument("noise std must be non-negative");
  }
  if (!(height_std >= 0.0) || !(height_mean > 0.0)) {
    throw std::invalid_argument("invalid height distribution");
  }
  if (height_std > 0.0 &&
      !(height_min <= height_mean && height_mean <= height_max)) {
    throw std::invalid_argument("height range must contain the mean");
  }
  if (!(camera_height_min > 0.0 && camera_height_min <= camera_height_max)) {
    throw std::invalid_argument("invalid camera height range");
  }
  if (!(tilt_min_deg <= tilt_max_deg) || !(tilt_max_deg < 90.0)) {
    throw std::invalid_argument("invalid tilt range");
  }
  if (!(roll_min_deg >= 0.0 && roll_min_deg <= roll_max_deg &&
        roll_max_deg < 90.0)) {
    throw std::invalid_argument("invalid roll range");
  }
  if (!(ground_range_m > 0.0)) {
    throw std::invalid_argument("ground range must be positive");
  }
}

CameraIntrinsics make_camera(int width, int height, double fov_deg) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image size must be positive");
  }
  if (!(fov_deg >= 1.0 && fov_deg < 180.0)) {
    throw std::invalid_argument("vertical FOV must be in [1, 180) degrees");
  }
  const double fy = (height / 2.0) / std::tan(fov_deg * kDegToRad / 2.0);
  const double fx = static_cast<double>(width) / height * fy;
  return CameraIntrinsics::centered(fx, fy, width, height);
}

double sample_truncated_normal(Rng& rng, double mean, double stddev, double lo,
                               double hi) {
  if (stddev == 0.0) return mean;
  if (!(lo < hi)) throw std::invalid_argument("empty truncation interval");
  std::normal_distribution<double> normal(mean, stddev);
  for (int i = 0; i < kMaxTruncationAttempts; ++i) {
    const double x = normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  throw std::runtime_error("truncated normal rejection sampling did not converge");
}

namespace {

std::optional<GroundTruthScene> try_sample_scene(const SceneConfig& config,
                                                 Rng& rng) {
  GroundTruthScene scene;
  scene.intrinsics = make_camera(config.width, config.height, config.fov_deg);

  using Uniform = std::uniform_real_distribution<double>;
  const double cam_height =
      Uniform(config.camera_height_min, config.camera_height_max)(rng);
  const double tilt =
      Uniform(config.tilt_min_deg, config.tilt_max_deg)(rng) * kDegToRad;
  const double roll_sign = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  const double roll =
      roll_sign * Uniform(config.roll_min_deg, config.roll_max_deg)(rng) *
      kDegToRad;

  // Upward direction in the camera frame (x right, y down, z forward) for a
  // camera pitched down by `tilt` and rolled about its optical axis.
  const Vec3 up_level(0.0, -std::cos(tilt), -std::sin(tilt));
  const Vec3 up = Eigen::AngleAxisd(roll, Vec3::UnitZ()) * up_level;
  scene.plane = {up.normalized(), cam_height};

  const Vec3& N = scene.plane.normal;
  const Vec3 footprint = -scene.plane.rho * N;
  const CameraIntrinsics& K = scene.intrinsics;

  Uniform col(-K.width / 2.0, K.width / 2.0);
  Uniform row(-K.height / 2.0, K.height / 2.0);
  for (int i = 0; i < config.person_count; ++i) {
    const double h = sample_truncated_normal(
        rng, config.height_mean, config.height_std, config.height_min,
        config.height_max);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
      const Vec2 pixel(col(rng), row(rng));
      const auto hit = back_project_to_plane(K, scene.plane, pixel);
      if (!hit || (*hit - footprint).norm() > config.ground_range_m) continue;
      const Vec3 ankle = *hit;
      const Vec3 shoulder = ankle + h * N;
      if (!projects_inside(K, ankle) || !projects_inside(K, shoulder) ||
          !reachable(config.distortion, K, ankle) ||
          !reachable(config.distortion, K, shoulder)) {
        continue;
      }
      scene.ankles.push_back(ankle);
      scene.shoulders.push_back(shoulder);
      scene.heights.push_back(h);
      placed = true;
      break;
    }
    if (!placed) return std::nullopt;
  }
  return scene;
}

}  // namespace

GroundTruthScene sample_scene(const SceneConfig& config, Rng& rng) {
  config.validate();
  // Some poses (a low camera pitched steeply with a narrow field of view) see
  // no full person at all; those are redrawn.
  for (int attempt = 0; attempt < kMaxPoseAttempts; ++attempt) {
    if (auto scene = try_sample_scene(config, rng)) return *std::move(scene);
  }
  throw std::runtime_error("could not place visible people in the scene");
}

Vec2 distort_polynomial(const Vec2& centered, const PolynomialDistortion& d) {
  const double r2 = centered.squaredNorm() /
                    (d.radius_unit_px * d.radius_unit_px);
  return (1.0 + d.k1 * r2 + d.k2 * r2 * r2) * centered;
}

Observations project_scene(const GroundTruthScene& scene, double noise_std,
                           const LensDistortion& distortion, Rng& rng) {
  if (!(noise_std >= 0.0)) {
    throw std::invalid_argument("noise std must be non-negative");
  }
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);
  const auto measure = [&](const Vec3& X) {
    if (!(X.z() > 0.0)) {
      throw std::invalid_argument("point behind the camera");
    }
    Vec2 p = project(scene.intrinsics, X);
    if (const auto* poly = std::get_if<PolynomialDistortion>(&distortion)) {
      p = distort_polynomial(p, *poly);
    } else if (const auto* div = std::get_if<DivisionDistortion>(&distortion)) {
      const PixelPoint d = distortion::distort_division(
          {p.x(), p.y(), Frame::kPrincipalCentered}, div->k);
      p = d.xy();
    }
    if (noise_std > 0.0) {
      p.x() += noise(rng);
      p.y() += noise(rng);
    }
    return PixelPoint{p.x(), p.y(), Frame::kPrincipalCentered};
  };
  Observations obs;
  obs.reserve(scene.ankles.size());
  for (std::size_t i = 0; i < scene.ankles.size(); ++i) {
    const PixelPoint ankle = measure(scene.ankles[i]);
    const PixelPoint shoulder = measure(scene.shoulders[i]);
    obs.push_back({ankle, shoulder});
  }
  return obs;
}

TrialMetrics evaluate(const CalibrationResult& estimate,
                      const GroundTruthScene& truth) {
  TrialMetrics m;
  m.fx = focal_error(estimate.intrinsics.fx, truth.intrinsics.fx);
  m.fy = focal_error(estimate.intrinsics.fy, truth.intrinsics.fy);
  m.normal = normal_error(estimate.plane.normal, truth.plane.normal);
  m.rho = rho_error(estimate.plane.rho, truth.plane.rho);
  std::vector<Vec3> est;
  std::vector<Vec3> ref;
  for (std::size_t i = 0; i < estimate.reconstruction.size(); ++i) {
    est.push_back(estimate.reconstruction[i].ankle);
    est.push_back(estimate.reconstruction[i].shoulder);
    ref.push_back(truth.ankles[i]);
    ref.push_back(truth.shoulders[i]);
  }
  m.recon = mean_reconstruction_error(est, ref);
  return m;
}

std::string_view to_string(Estimator e) {
  switch (e) {
    case Estimator::kDirect:
      return "direct";
    case Estimator::kBaseline:
      return "baseline";
    case Estimator::kDistortion:
      return "distortion";
  }
  return "?";
}

TrialOutcome run_trial(const SceneConfig& config, Rng& rng,
                       const TrialOptions& options) {
  const GroundTruthScene scene = sample_scene(config, rng);
  const Observations obs =
      project_scene(scene, config.noise_std, config.distortion, rng);
  const HeightPrior h(config.height_mean);

  TrialOutcome outcome;
  for (const Estimator e : options.estimators) {
    try {
      CalibrationResult result;
      switch (e) {
        case Estimator::kDirect:
          result = calibrate_batch(obs, h, options.fx_eq_fy);
          break;
        case Estimator::kBaseline:
          result = baseline::baseline_calibrate(obs, h, options.fx_eq_fy);
          break;
        case Estimator::kDistortion:
          result = distortion::distorted_calibrate(obs, h, options.fx_eq_fy)
                       .calibration;
          break;
      }
      const TrialMetrics m = evaluate(result, scene);
      const bool finite = std::isfinite(m.fx) && std::isfinite(m.fy) &&
                          std::isfinite(m.normal) && std::isfinite(m.rho) &&
                          std::isfinite(m.recon);
      outcome.metrics.push_back(finite ? std::optional(m) : std::nullopt);
    } catch (const EstimationFailure&) {
      outcome.metrics.push_back(std::nullopt);
    }
  }
  return outcome;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over the combined key.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MonteCarloResult run_monte_carlo(const SceneConfig& config, int trials,
                                 const TrialOptions& options,
                                 unsigned workers) {
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  config.validate();

  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(trials));
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(trials));

  std::atomic<int> next{0};
  const auto work = [&] {
    for (int t = next++; t < trials; t = next++) {
      Rng rng(trial_seed(config.rng_seed, static_cast<std::uint64_t>(t)));
      outcomes[static_cast<std::size_t>(t)] = run_trial(config, rng, options);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  // Sequential reduction in trial order keeps the sums bit-reproducible.
  MonteCarloResult result{options.estimators, {}};
  for (std::size_t e = 0; e < options.estimators.size(); ++e) {
    Accumulator fx, fy, normal, rho, recon;
    std::size_t ok = 0;
    for (const auto& outcome : outcomes) {
      const auto& m = outcome.metrics[e];
      if (!m) continue;
      ++ok;
      fx.add(m->fx);
      fy.add(m->fy);
      normal.add(m->normal);
      rho.add(m->rho);
      recon.add(m->recon);
    }
    TrialStats s;
    s.trial_count = static_cast<std::size_t>(trials);
    s.fx_err = fx.mean(ok);
    s.fy_err = fy.mean(ok);
    s.normal_err = normal.mean(ok);
    s.rho_err = rho.mean(ok);
    s.recon_err = recon.mean(ok);
    s.fx_err_std = fx.stddev(ok);
    s.fy_err_std = fy.stddev(ok);
    s.normal_err_std = normal.stddev(ok);
    s.rho_err_std = rho.stddev(ok);
    s.recon_err_std = recon.stddev(ok);
    s.failure_rate = 100.0 * double(s.trial_count - ok) / double(s.trial_count);
    result.stats.push_back(s);
  }
  return result;
}

std::string_view to_string(Study s) {
  switch (s) {
    case Study::kNoiseFree:
      return "noisefree";
    case Study::kNoise:
      return "noise";
    case Study::kHeight:
      return "height";
    case Study::kCount:
      return "count";
    case Study::kDistortion:
      return "distortion";
  }
  return "?";
}

std::optional<Study> study_from_string(std::string_view name) {
  for (const Study s : {Study::kNoiseFree, Study::kNoise, Study::kHeight,
                        Study::kCount, Study::kDistortion}) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<SceneConfig> study_configs(Study study, std::uint64_t seed) {
  std::vector<SceneConfig> configs;
  SceneConfig base;
  base.rng_seed = seed;
  const auto add = [&](SceneConfig c) {
    c.rng_seed = trial_seed(seed, 1000003ULL * (configs.size() + 1));
    configs.push_back(c);
  };
  switch (study) {
    case Study::kNoiseFree:
      for (const auto [w, h] : {std::pair{640, 480}, std::pair{1280, 720},
                                std::pair{1920, 1080}}) {
        for (const double fov : {45.0, 60.0, 90.0, 120.0}) {
          SceneConfig c = base;
          c.width = w;
          c.height = h;
          c.fov_deg = fov;
          add(c);
        }
      }
      break;
    case Study::kNoise:
      for (const double noise : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
        SceneConfig c = base;
        c.noise_std = noise;
        add(c);
      }
      break;
    case Study::kHeight:
      for (const double sd : {0.05, 0.1, 0.15, 0.2, 0.25}) {
        SceneConfig c = base;
        c.noise_std = 0.5;
        c.height_std = sd;
        add(c);
      }
      break;
    case Study::kCount:
      for (const int people : {5, 10, 20, 50, 100}) {
        SceneConfig c = base;
        c.noise_std = 0.5;
        c.height_std = 0.1;
        c.person_count = people;
        add(c);
      }
      break;
    case Study::kDistortion: {
      const double unit = make_camera(base.width, base.height, base.fov_deg).fx;
      for (const auto [k1, k2] :
           {std::pair{1e-3, 0.0}, std::pair{-1e-3, 0.0}, std::pair{1e-4, 0.0},
            std::pair{-1e-4, 0.0}, std::pair{1e-4, 1e-5},
            std::pair{-1e-4, 1e-5}}) {
        SceneConfig c = base;
        c.person_count = 20;
        c.distortion = PolynomialDistortion{k1, k2, unit};
        add(c);
      }
      break;
    }
  }
  return configs;
}

std::vector<StudyRow> run_study(Study study, int trials, std::uint64_t seed,
                                unsigned workers) {
  TrialOptions options;
  std::vector<std::string> names = {"direct", "baseline"};
  if (study == Study::kDistortion) {
    options.estimators = {Estimator::kDistortion, Estimator::kDirect};
    names = {"with_distortion_model", "without_distortion_model"};
  }
  std::vector<StudyRow> rows;
  for (const SceneConfig& config : study_configs(study, seed)) {
    const MonteCarloResult mc =
        run_monte_carlo(config, trials, options, workers);
    for (std::size_t e = 0; e < mc.stats.size(); ++e) {
      rows.push_back({study, config, names[e], mc.stats[e]});
    }
  }
  return rows;
}

void write_csv_header(std::ostream& os) {
  os << "study,width,height,fov_deg,people,noise_std,height_std,k1,k2,"
        "solver,trials,fx_err_pct,fy_err_pct,normal_err_deg,rho_err_pct,"
        "recon_err_pct,fail_pct,fx_err_std,fy_err_std,normal_err_std,"
        "rho_err_std,recon_err_std\n";
}

void write_csv_rows(std::ostream& os, const std::vector<StudyRow>& rows) {
  const auto old_flags = os.flags();
  const auto old_precision = os.precision();
  os << std::setprecision(10);
  for (const auto& r : rows) {
    double k1 = 0.0;
    double k2 = 0.0;
    if (const auto* p = std::get_if<PolynomialDistortion>(&r.config.distortion)) {
      k1 = p->k1;
      k2 = p->k2;
    }
    const auto& s = r.stats;
    os << to_string(r.study) << ',' << r.config.width << ','
       << r.config.height << ',' << r.config.fov_deg << ','
       << r.config.person_count << ',' << r.config.noise_std << ','
       << r.config.height_std << ',' << k1 << ',' << k2 << ',' << r.solver
       << ',' << s.trial_count << ',' << s.fx_err << ',' << s.fy_err << ','
       << s.normal_err << ',' << s.rho_err << ',' << s.recon_err << ','
       << s.failure_rate << ',' << s.fx_err_std << ',' << s.fy_err_std << ','
       << s.normal_err_std << ',' << s.rho_err_std << ',' << s.recon_err_std
       << '\n';
  }
  os.flags(old_flags);
  os.precision(old_precision);
}

}  // namespace posedist::sim
