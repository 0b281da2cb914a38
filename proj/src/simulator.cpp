#include "stagekin/simulator.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "stagekin/montecarlo.hpp"

namespace stagekin::sim {

using nlohmann::json;

StageSpec reference_stage_spec() {
  StageSpec spec;
  spec.inter_axis_angles_deg = {89.5, 90.9, 90.2};
  return spec;
}

void TruthStage::validate() const {
  for (const auto& d : axis_dirs) {
    if (std::abs(d.norm() - 1.0) > 1e-9) {
      throw DegenerateInput("truth stage: axis directions must be unit length");
    }
  }
  // Corner quad planarity: corner 2 must lie in the plane of the others.
  const Point3 n = (corners[0] - corners[3]).cross(corners[2] - corners[3]);
  if (n.norm() < 1e-9) {
    throw DegenerateInput("truth stage: corner quad is degenerate");
  }
  if (std::abs(n.normalized().dot(corners[1] - corners[3])) > 1e-9) {
    throw DegenerateInput("truth stage: corner quad is not planar");
  }
  if (!(cornea_radius_mm > 0.0) || !(eyeball_radius_mm > 0.0)) {
    throw DegenerateInput("truth stage: sphere radii must be positive");
  }
}

void NoiseSpec::validate() const {
  if (corner_sigma_mm < 0 || surface_sigma_mm < 0 || tracker_sigma_mm < 0 ||
      axis_noise_deg < 0) {
    throw SchemaViolation("noise spec: sigmas must be non-negative");
  }
}

std::vector<PlanRow> standard_acquisition_plan() {
  using dataio::kTagAxisTest;
  using dataio::kTagLinearTrain;
  using dataio::kTagNeutralTest;
  using dataio::kTagNeutralTrain;
  using dataio::kTagRotaryTrain;
  return {
      {1, {0, 0, 0, 0}, {kTagNeutralTrain, kTagLinearTrain}},
      {2, {-7.5, 0, 0, 0}, {kTagLinearTrain}},
      {3, {+7.5, 0, 0, 0}, {kTagAxisTest}},
      {4, {0, 0, 0, 0}, {kTagNeutralTrain, kTagLinearTrain}},
      {5, {0, -7.5, 0, 0}, {kTagLinearTrain}},
      {6, {0, +7.5, 0, 0}, {kTagAxisTest}},
      {7, {0, 0, 0, 0}, {kTagNeutralTrain, kTagRotaryTrain}},
      {8, {0, 0, -15, 0}, {kTagRotaryTrain}},
      {9, {0, 0, +8, 0}, {kTagAxisTest}},
      {10, {0, 0, +15, 0}, {kTagRotaryTrain}},
      {11, {0, 0, 0, 0}, {kTagNeutralTest, kTagRotaryTrain}},
      {12, {0, 0, 0, -30}, {kTagRotaryTrain}},
      {13, {0, 0, 0, +15}, {kTagAxisTest}},
      {14, {0, 0, 0, +30}, {kTagRotaryTrain}},
      {15, {0, 0, 0, 0}, {kTagNeutralTest}},
  };
}

std::vector<StageConfig> reference_evaluation_configs() {
  std::vector<StageConfig> configs;
  const std::array<double, 5> linear = {7.5, 10.0, 12.5, 15.0, 17.5};
  for (double v : linear) configs.push_back({v, 0, 0, 0});
  for (double v : linear) configs.push_back({0, v, 0, 0});
  for (double v : {-10.0, -5.0, 0.0, 5.0, 10.0}) configs.push_back({0, 0, v, 0});
  // Rotation-stage dial readings 290/298/307/316/324 relative to a 300
  // degree dial offset.
  for (double dial : {290.0, 298.0, 307.0, 316.0, 324.0}) {
    configs.push_back({0, 0, 0, dial - 300.0});
  }
  return configs;
}

StageConfig default_referencing_config() { return {8.0, 7.0, 8.0, 56.0}; }

namespace {

/// Unit vector at `angle_deg` from `from`, tilted toward the component of
/// `toward` orthogonal to `from`.
Point3 tilt_from(const Point3& from, const Point3& toward, double angle_deg) {
  const Point3 ortho = (toward - toward.dot(from) * from).normalized();
  const double a = geom::deg2rad(angle_deg);
  return (std::cos(a) * from + std::sin(a) * ortho).normalized();
}

}  // namespace

TruthStage synthesize_stage(const StageSpec& spec) {
  for (double a : spec.inter_axis_angles_deg) {
    if (!(a > 80.0 && a < 100.0)) {
      throw DegenerateInput("synthesize_stage: inter-axis angles must lie in (80, 100) deg");
    }
  }
  if (spec.cornea_samples < 4 || spec.eyeball_samples < 4) {
    throw DegenerateInput("synthesize_stage: need at least 4 surface samples per sphere");
  }

  // Base layout with y up: lin1 along x, lin2 tilted from z toward x,
  // goniometer tilted from lin2 toward x, rotation stage tilted from the
  // goniometer toward y. Consecutive tilts realize the requested angles
  // exactly.
  std::array<Point3, 4> dirs;
  dirs[0] = Point3::UnitX();
  dirs[1] = tilt_from(dirs[0], Point3::UnitZ(), spec.inter_axis_angles_deg[0]);
  dirs[2] = tilt_from(dirs[1], Point3::UnitX(), spec.inter_axis_angles_deg[1]);
  dirs[3] = tilt_from(dirs[2], Point3::UnitY(), spec.inter_axis_angles_deg[2]);

  TruthStage truth;
  truth.inter_axis_angles_deg = spec.inter_axis_angles_deg;
  truth.cornea_samples = spec.cornea_samples;
  truth.eyeball_samples = spec.eyeball_samples;
  truth.seed = spec.seed;

  std::array<Point3, 4> origins = {Point3(0, 0, 0), Point3(0, 0, 0),
                                   Point3(4, -45, 6), Point3(0, 6, -2)};

  // Holder checkerboard: a 34 x 26 mm rectangle in the plane z = 65,
  // origin corner 4, corner 1 along +x, corner 3 along +y.
  std::array<Point3, 4> corners;
  corners[3] = Point3(12, 38, 65);
  corners[0] = corners[3] + 34.0 * Point3::UnitX();
  corners[2] = corners[3] + 26.0 * Point3::UnitY();
  corners[1] = corners[3] + 34.0 * Point3::UnitX() + 26.0 * Point3::UnitY();

  truth.cornea_radius_mm = 7.7;
  truth.eyeball_radius_mm = 11.6;
  const Point3 z_e(16, 92, 10);
  const Point3 gaze = Point3(0.30, -0.10, -0.95).normalized();
  const Point3 z_c = z_e + 5.7 * gaze;

  // A fixed global tilt and offset keep the synthetic volume frame from
  // being axis-aligned with the stage.
  const Eigen::Matrix3d r0 =
      Eigen::AngleAxisd(0.28, Point3(0.27, 0.94, 0.21).normalized()).toRotationMatrix();
  const Point3 t0(120, 95, 110);

  for (int i = 0; i < 4; ++i) {
    truth.axis_dirs[i] = r0 * dirs[i];
    truth.axis_origins[i] = r0 * origins[i] + t0;
    truth.corners[i] = r0 * corners[i] + t0;
  }
  truth.z_c = r0 * z_c + t0;
  truth.z_e = r0 * z_e + t0;

  truth.validate();
  return truth;
}

RigidTransform direct_transform(const TruthStage& truth, const StageConfig& cfg) {
  RigidTransform total;
  for (int i = 0; i < 4; ++i) {
    const double value = cfg[i];
    if (value == 0.0) continue;
    RigidTransform t;
    if (i < 2) {
      t = RigidTransform::translation(value * truth.axis_dirs[i]);
    } else {
      t = RigidTransform::rotation_about_axis(truth.axis_origins[i],
                                              truth.axis_dirs[i],
                                              geom::deg2rad(value));
    }
    total = total * t;
  }
  return total;
}

namespace {

Point3 gaussian3(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return Point3::Zero();
  std::normal_distribution<double> n(0.0, sigma);
  return Point3(n(rng), n(rng), n(rng));
}

/// Uniform samples on a spherical cap of half-angle `max_polar_rad` about
/// `axis` (the full sphere for pi).
std::vector<Point3> sample_sphere(std::mt19937_64& rng, const Point3& center,
                                  double radius, const Point3& axis,
                                  double max_polar_rad, int count) {
  const Point3 a = axis.normalized();
  const auto frame = geom::complete_right_handed_basis(Point3::Zero(), a);
  const Point3 u = frame.y_axis();
  const Point3 v = frame.z_axis();
  std::uniform_real_distribution<double> ucos(std::cos(max_polar_rad), 1.0);
  std::uniform_real_distribution<double> uazi(0.0, 2.0 * geom::kPi);
  std::vector<Point3> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double c = ucos(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double azi = uazi(rng);
    const Point3 dir = c * a + s * (std::cos(azi) * u + std::sin(azi) * v);
    out.push_back(center + radius * dir);
  }
  return out;
}

constexpr std::uint64_t kStreamCorners = 1;
constexpr std::uint64_t kStreamCornea = 2;
constexpr std::uint64_t kStreamEyeball = 3;
constexpr std::uint64_t kStreamTracker = 4;
constexpr std::uint64_t kStreamTrackerAxis = 5;

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t item) {
  return std::mt19937_64(
      mc::splitmix64(seed ^ mc::splitmix64(stream * 0x10001ULL + item)));
}

}  // namespace

Dataset generate_dataset(const TruthStage& truth, const std::vector<PlanRow>& plan,
                         const NoiseSpec& noise) {
  noise.validate();
  if (plan.empty()) {
    throw DegenerateInput("generate_dataset: empty acquisition plan");
  }

  const Point3 gaze = (truth.z_c - truth.z_e).normalized();

  Dataset ds;
  ds.unit = dataio::Unit::Millimeter;
  for (const auto& row : plan) {
    row.config.validate("plan row " + std::to_string(row.id));
    const RigidTransform m = direct_transform(truth, row.config);

    dataio::ScanRecord scan;
    scan.id = row.id;
    scan.config = row.config;
    scan.types = row.types;

    auto corner_rng = stream_rng(noise.seed, kStreamCorners, static_cast<std::uint64_t>(row.id));
    for (int k = 0; k < 4; ++k) {
      scan.corners[k] = m.apply(truth.corners[k]) + gaussian3(corner_rng, noise.corner_sigma_mm);
    }

    const bool neutral_type = scan.has_tag(dataio::kTagNeutralTrain) ||
                              scan.has_tag(dataio::kTagNeutralTest);
    if (neutral_type) {
      auto cornea_rng = stream_rng(noise.seed, kStreamCornea, static_cast<std::uint64_t>(row.id));
      auto cornea = sample_sphere(cornea_rng, truth.z_c, truth.cornea_radius_mm,
                                  gaze, geom::deg2rad(60.0), truth.cornea_samples);
      auto eyeball_rng = stream_rng(noise.seed, kStreamEyeball, static_cast<std::uint64_t>(row.id));
      auto eyeball = sample_sphere(eyeball_rng, truth.z_e, truth.eyeball_radius_mm,
                                   gaze, geom::kPi, truth.eyeball_samples);
      for (auto& p : cornea) p = m.apply(p) + gaussian3(cornea_rng, noise.surface_sigma_mm);
      for (auto& p : eyeball) p = m.apply(p) + gaussian3(eyeball_rng, noise.surface_sigma_mm);
      scan.cornea_points = std::move(cornea);
      scan.eyeball_points = std::move(eyeball);
    }
    ds.scans.push_back(std::move(scan));
  }
  return ds;
}

CbTruth true_state_in_cb(const TruthStage& truth, const StageConfig& measurement,
                         const StageConfig& referencing) {
  const RigidTransform m = direct_transform(truth, measurement);
  const Point3 z_c = m.apply(truth.z_c);
  const Point3 z_e = m.apply(truth.z_e);

  const RigidTransform ref = direct_transform(truth, referencing);
  const Point3 c1 = ref.apply(truth.corners[0]);
  const Point3 c3 = ref.apply(truth.corners[2]);
  const Point3 c4 = ref.apply(truth.corners[3]);
  const Point3 x = (c1 - c4).normalized();
  const Point3 yr = c3 - c4;
  const Point3 y = (yr - yr.dot(x) * x).normalized();
  const Point3 z = x.cross(y);

  // Coordinates relative to the posed checkerboard frame.
  Eigen::Matrix3d basis;
  basis.col(0) = x;
  basis.col(1) = y;
  basis.col(2) = z;
  const Eigen::Matrix3d bt = basis.transpose();

  CbTruth out;
  out.z_c = bt * (z_c - c4);
  out.z_e = bt * (z_e - c4);
  out.axis = (out.z_c - out.z_e).normalized();
  return out;
}

std::vector<TrackerEstimate> simulate_tracker(const TruthStage& truth,
                                              const std::vector<StageConfig>& configs,
                                              const StageConfig& referencing,
                                              const NoiseSpec& noise) {
  noise.validate();
  if (configs.empty()) {
    throw DegenerateInput("simulate_tracker: no measurement configurations");
  }
  std::vector<TrackerEstimate> out;
  out.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const CbTruth truth_cb = true_state_in_cb(truth, configs[i], referencing);

    TrackerEstimate est;
    est.config = configs[i];
    auto rng = stream_rng(noise.seed, kStreamTracker, i);
    est.z_c_star = truth_cb.z_c + noise.tracker_bias_mm + gaussian3(rng, noise.tracker_sigma_mm);

    est.axis_star = truth_cb.axis;
    if (noise.axis_noise_deg > 0.0) {
      auto axis_rng = stream_rng(noise.seed, kStreamTrackerAxis, i);
      const auto frame = geom::complete_right_handed_basis(Point3::Zero(), truth_cb.axis);
      std::uniform_real_distribution<double> uazi(0.0, 2.0 * geom::kPi);
      std::normal_distribution<double> angle(0.0, geom::deg2rad(noise.axis_noise_deg));
      const double azi = uazi(axis_rng);
      const Point3 perp = std::cos(azi) * frame.y_axis() + std::sin(azi) * frame.z_axis();
      est.axis_star = Eigen::AngleAxisd(angle(axis_rng), perp) * truth_cb.axis;
    }
    out.push_back(est);
  }
  return out;
}

namespace {

json point_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

Point3 point_from_json(const json& j) {
  Point3 p;
  for (int i = 0; i < 3; ++i) p[i] = j.at(i).get<double>();
  if (!p.allFinite()) {
    throw SchemaViolation("coordinate triple contains a non-finite value");
  }
  return p;
}

}  // namespace

std::string truth_to_json_string(const TruthStage& truth) {
  json j;
  const std::array<std::string, 4> names = {"lin1", "lin2", "gon", "rot"};
  for (int i = 0; i < 4; ++i) {
    j["axes"][names[i]] = {{"origin", point_to_json(truth.axis_origins[i])},
                           {"dir", point_to_json(truth.axis_dirs[i])}};
  }
  for (int k = 1; k <= 4; ++k) {
    j["corners"]["c" + std::to_string(k)] = point_to_json(truth.corners[k - 1]);
  }
  j["z_c"] = point_to_json(truth.z_c);
  j["z_e"] = point_to_json(truth.z_e);
  j["cornea_radius_mm"] = truth.cornea_radius_mm;
  j["eyeball_radius_mm"] = truth.eyeball_radius_mm;
  j["inter_axis_angles_deg"] = truth.inter_axis_angles_deg;
  j["cornea_samples"] = truth.cornea_samples;
  j["eyeball_samples"] = truth.eyeball_samples;
  j["seed"] = truth.seed;
  return j.dump(2) + "\n";
}

TruthStage truth_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(std::string("truth: JSON parse error: ") + e.what());
  }
  try {
    TruthStage truth;
    const std::array<std::string, 4> names = {"lin1", "lin2", "gon", "rot"};
    for (int i = 0; i < 4; ++i) {
      truth.axis_origins[i] = point_from_json(j.at("axes").at(names[i]).at("origin"));
      truth.axis_dirs[i] = point_from_json(j.at("axes").at(names[i]).at("dir"));
    }
    for (int k = 1; k <= 4; ++k) {
      truth.corners[k - 1] = point_from_json(j.at("corners").at("c" + std::to_string(k)));
    }
    truth.z_c = point_from_json(j.at("z_c"));
    truth.z_e = point_from_json(j.at("z_e"));
    truth.cornea_radius_mm = j.at("cornea_radius_mm").get<double>();
    truth.eyeball_radius_mm = j.at("eyeball_radius_mm").get<double>();
    for (int i = 0; i < 3; ++i) {
      truth.inter_axis_angles_deg[i] = j.at("inter_axis_angles_deg").at(i).get<double>();
    }
    truth.cornea_samples = j.at("cornea_samples").get<int>();
    truth.eyeball_samples = j.at("eyeball_samples").get<int>();
    truth.seed = j.value("seed", 0ULL);
    truth.validate();
    return truth;
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("truth: malformed field: ") + e.what());
  }
}

void save_truth(const TruthStage& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write truth file: " + path.string());
  out << truth_to_json_string(truth);
  if (!out) throw IoError("write failed: " + path.string());
}

TruthStage load_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open truth file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return truth_from_json_string(buffer.str());
}

std::string estimates_to_json_string(const std::vector<TrackerEstimate>& estimates,
                                     const StageConfig& referencing) {
  json j;
  const auto rp = referencing.as_array();
  j["referencing_P"] = {rp[0], rp[1], rp[2], rp[3]};
  j["estimates"] = json::array();
  for (const auto& est : estimates) {
    const auto p = est.config.as_array();
    j["estimates"].push_back({{"P", {p[0], p[1], p[2], p[3]}},
                              {"z_c_star", point_to_json(est.z_c_star)},
                              {"axis_star", point_to_json(est.axis_star)}});
  }
  return j.dump(2) + "\n";
}

EstimatesFile estimates_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(std::string("estimates: JSON parse error: ") + e.what());
  }
  try {
    EstimatesFile file;
    std::array<double, 4> rp{};
    for (int i = 0; i < 4; ++i) rp[i] = j.at("referencing_P").at(i).get<double>();
    file.referencing = StageConfig::from_array(rp);
    for (const auto& je : j.at("estimates")) {
      TrackerEstimate est;
      std::array<double, 4> p{};
      for (int i = 0; i < 4; ++i) p[i] = je.at("P").at(i).get<double>();
      est.config = StageConfig::from_array(p);
      est.z_c_star = point_from_json(je.at("z_c_star"));
      est.axis_star = point_from_json(je.at("axis_star"));
      file.estimates.push_back(est);
    }
    if (file.estimates.empty()) {
      throw SchemaViolation("estimates: empty estimate list");
    }
    return file;
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("estimates: malformed field: ") + e.what());
  }
}

void save_estimates(const std::vector<TrackerEstimate>& estimates,
                    const StageConfig& referencing, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write estimates file: " + path.string());
  out << estimates_to_json_string(estimates, referencing);
  if (!out) throw IoError("write failed: " + path.string());
}

EstimatesFile load_estimates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open estimates file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return estimates_from_json_string(buffer.str());
}

}  // namespace stagekin::sim
