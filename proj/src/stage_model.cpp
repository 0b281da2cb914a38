#include "stagekin/stage_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

namespace stagekin::model {

using dataio::ScanRecord;
using nlohmann::json;

void Theta::validate() const {
  cs_lin1.validate();
  cs_lin2.validate();
  cs_gon.validate();
  cs_rot.validate();
  if (!(cornea.radius > 0.0) || !(eyeball.radius > 0.0)) {
    throw DegenerateInput("theta: sphere radii must be positive");
  }
  if (!(cornea.radius < eyeball.radius)) {
    throw DegenerateInput(
        "theta: cornea sphere must be smaller than the eyeball sphere");
  }
  if ((cornea.center - eyeball.center).norm() <= 0.0) {
    throw DegenerateInput(
        "theta: cornea and eyeball centers must be distinct");
  }
}

RigidTransform stage_transform(StageAxis axis, double value) {
  if (!std::isfinite(value)) {
    throw DegenerateInput("stage_transform: non-finite setting");
  }
  switch (axis) {
    case StageAxis::Lin1:
    case StageAxis::Lin2:
      return RigidTransform::translation(Point3(value, 0.0, 0.0));
    case StageAxis::Gon:
    case StageAxis::Rot: {
      const double a = geom::deg2rad(value);
      const double c = std::cos(a);
      const double s = std::sin(a);
      Eigen::Matrix3d r;
      r << 1, 0, 0,  //
          0, c, -s,  //
          0, s, c;
      return RigidTransform::from_rt(r, Point3::Zero());
    }
  }
  throw Error("stage_transform: bad axis");
}

namespace {

constexpr double kSettingEps = 1e-12;

/// Runs the bottom-to-top chain: for each non-neutral stage, conjugate
/// every frame above it plus all payload points/frames through the
/// currently posed stage frame. Stages at zero are skipped so a neutral
/// configuration is an exact identity.
void apply_chain(std::array<CoordinateSystem, 4>& frames,
                 const StageConfig& cfg, std::vector<Point3>& points,
                 std::vector<CoordinateSystem>& payload_frames) {
  for (int i = 0; i < 4; ++i) {
    const double value = cfg[i];
    if (value == 0.0) continue;
    const RigidTransform t = stage_transform(static_cast<StageAxis>(i), value);
    const RigidTransform w = geom::world_to_frame(frames[i]);
    const RigidTransform conj = w.inverse() * t * w;
    for (int j = i + 1; j < 4; ++j) frames[j] = frames[j].transformed(conj);
    for (auto& p : points) p = conj.apply(p);
    for (auto& f : payload_frames) f = f.transformed(conj);
  }
}

struct ChainResult {
  std::array<CoordinateSystem, 4> frames;
  std::vector<Point3> points;
  std::vector<CoordinateSystem> payload_frames;
};

ChainResult run_chain(const Theta& theta, const StageConfig& cfg,
                      std::vector<Point3> points,
                      std::vector<CoordinateSystem> payload_frames) {
  ChainResult res{{theta.cs_lin1, theta.cs_lin2, theta.cs_gon, theta.cs_rot},
                  std::move(points),
                  std::move(payload_frames)};
  apply_chain(res.frames, cfg, res.points, res.payload_frames);
  return res;
}

}  // namespace

PosedModel forward_kinematics(const Theta& theta, const StageConfig& cfg) {
  auto res = run_chain(theta, cfg, {theta.cornea.center, theta.eyeball.center}, {});
  return PosedModel{res.frames[0], res.frames[1], res.frames[2], res.frames[3],
                    res.points[0], res.points[1]};
}

std::vector<Point3> pose_points(const Theta& theta, const StageConfig& cfg,
                                std::span<const Point3> points) {
  return run_chain(theta, cfg, {points.begin(), points.end()}, {}).points;
}

CoordinateSystem pose_frame(const Theta& theta, const StageConfig& cfg,
                            const CoordinateSystem& frame) {
  return run_chain(theta, cfg, {}, {frame}).payload_frames[0];
}

RigidTransform rigid_motion_of(const Theta& theta, const StageConfig& cfg) {
  const CoordinateSystem posed = pose_frame(theta, cfg, CoordinateSystem::world());
  return RigidTransform::from_rt(posed.basis(), posed.origin());
}

CoordinateSystem build_cs_cb(const Theta& theta,
                             const StageConfig& referencing_cfg) {
  const Point3& c1 = theta.neutral_corners[0];
  const Point3& c3 = theta.neutral_corners[2];
  const Point3& c4 = theta.neutral_corners[3];

  const Point3 xr = c1 - c4;
  if (xr.norm() < 1e-9) {
    throw DegenerateInput("build_cs_cb: corners 1 and 4 coincide");
  }
  const Point3 x = xr.normalized();
  const Point3 yr = c3 - c4;
  const Point3 yo = yr - yr.dot(x) * x;
  if (yo.norm() < 1e-9) {
    throw DegenerateInput("build_cs_cb: corner 3 lies on the corner 4-1 axis");
  }
  const Point3 y = yo.normalized();
  const Point3 z = x.cross(y);
  const CoordinateSystem neutral = CoordinateSystem::from_origin_axes(c4, x, y, z);
  return pose_frame(theta, referencing_cfg, neutral);
}

GroundTruth ground_truth_in_cb(const Theta& theta,
                               const StageConfig& measurement_cfg,
                               const StageConfig& referencing_cfg) {
  const PosedModel posed = forward_kinematics(theta, measurement_cfg);
  const CoordinateSystem cb = build_cs_cb(theta, referencing_cfg);
  const RigidTransform w = geom::world_to_frame(cb);
  GroundTruth gt;
  gt.z_c = w.apply(posed.z_c);
  gt.z_e = w.apply(posed.z_e);
  const Point3 d = gt.z_c - gt.z_e;
  if (d.norm() < 1e-12) {
    throw DegenerateInput("ground_truth_in_cb: sphere centers coincide");
  }
  gt.geometrical_axis = d.normalized();
  return gt;
}

namespace {

std::string ids_of(std::span<const ScanRecord* const> scans) {
  std::ostringstream out;
  for (std::size_t i = 0; i < scans.size(); ++i) {
    if (i > 0) out << "/";
    out << scans[i]->id;
  }
  return out.str();
}

bool others_neutral(const ScanRecord& s, int axis) {
  for (int i = 0; i < 4; ++i) {
    if (i != axis && std::abs(s.config[i]) > kSettingEps) return false;
  }
  return true;
}

/// Training pair for a linear axis: among linear-training scans moving
/// only this axis, the lowest setting is paired with the highest; ties on
/// the high side resolve to the scan nearest by id to the low one. The
/// difference (high minus low) points in the direction of increasing
/// setting.
std::pair<const ScanRecord*, const ScanRecord*> linear_pair(const Dataset& ds,
                                                            int axis) {
  std::vector<const ScanRecord*> group;
  for (const auto* s : ds.scans_with_tag(dataio::kTagLinearTrain)) {
    if (others_neutral(*s, axis)) group.push_back(s);
  }
  const std::string name = axis == 0 ? "linear stage 1" : "linear stage 2";
  if (group.size() < 2) {
    throw DegenerateInput("calibrate: " + name +
                          " needs at least two linear-training scans");
  }
  const ScanRecord* lo = group.front();
  for (const auto* s : group) {
    if (s->config[axis] < lo->config[axis]) lo = s;
  }
  const ScanRecord* hi = nullptr;
  double best_value = -std::numeric_limits<double>::infinity();
  for (const auto* s : group) {
    if (s == lo) continue;
    const double v = s->config[axis];
    const bool better =
        hi == nullptr || v > best_value ||
        (v == best_value && std::abs(s->id - lo->id) < std::abs(hi->id - lo->id));
    if (better) {
      hi = s;
      best_value = v;
    }
  }
  if (hi == nullptr || hi->config[axis] - lo->config[axis] <= kSettingEps) {
    throw DegenerateInput("calibrate: " + name +
                          " needs two distinct settings (scans " +
                          ids_of(group) + ")");
  }
  return {hi, lo};
}

/// Three rotary-training poses for the goniometer or rotation stage:
/// scans moving only this axis, reduced to distinct settings (duplicates
/// resolve to the scan nearest by id to a moving scan) and restricted to
/// the neutral, minimum and maximum settings, ordered by id.
std::array<const ScanRecord*, 3> rotary_triple(const Dataset& ds, int axis) {
  const std::string name = axis == 2 ? "goniometer" : "rotation stage";
  std::vector<const ScanRecord*> group;
  for (const auto* s : ds.scans_with_tag(dataio::kTagRotaryTrain)) {
    if (others_neutral(*s, axis)) group.push_back(s);
  }
  std::vector<const ScanRecord*> moving;
  for (const auto* s : group) {
    if (std::abs(s->config[axis]) > kSettingEps) moving.push_back(s);
  }
  auto id_distance = [&moving](const ScanRecord* s) {
    int best = std::numeric_limits<int>::max();
    for (const auto* m : moving) best = std::min(best, std::abs(s->id - m->id));
    return best;
  };

  // Deduplicate by setting value.
  std::vector<const ScanRecord*> distinct;
  for (const auto* s : group) {
    auto it = std::find_if(distinct.begin(), distinct.end(), [&](const ScanRecord* d) {
      return std::abs(d->config[axis] - s->config[axis]) <= kSettingEps;
    });
    if (it == distinct.end()) {
      distinct.push_back(s);
    } else if (!moving.empty()) {
      const int cur = id_distance(*it);
      const int cand = id_distance(s);
      if (cand < cur || (cand == cur && s->id < (*it)->id)) *it = s;
    }
  }
  if (distinct.size() < 3) {
    throw DegenerateInput("calibrate: " + name +
                          " needs three distinct rotary-training settings");
  }

  auto by_setting = [axis](const ScanRecord* a, const ScanRecord* b) {
    return a->config[axis] < b->config[axis];
  };
  std::vector<const ScanRecord*> chosen;
  chosen.push_back(*std::min_element(distinct.begin(), distinct.end(), by_setting));
  chosen.push_back(*std::max_element(distinct.begin(), distinct.end(), by_setting));
  for (const auto* s : distinct) {
    if (chosen.size() >= 3) break;
    if (std::find(chosen.begin(), chosen.end(), s) == chosen.end()) {
      chosen.push_back(s);
    }
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const ScanRecord* a, const ScanRecord* b) { return a->id < b->id; });
  return {chosen[0], chosen[1], chosen[2]};
}

/// Median of the per-corner circle centers and of the per-corner plane
/// normals for one rotary stage.
struct RotaryFit {
  Point3 origin;
  Point3 axis_dir;  // unit, sign not yet dial-consistent
};

RotaryFit fit_rotary(const std::array<const ScanRecord*, 3>& scans,
                     const std::string& name) {
  std::vector<Point3> centers;
  std::vector<Point3> normals;
  for (int k = 0; k < 4; ++k) {
    const Point3& a = scans[0]->corners[k];
    const Point3& b = scans[1]->corners[k];
    const Point3& c = scans[2]->corners[k];
    try {
      centers.push_back(fitting::fit_circle_3pt(a, b, c).center);
    } catch (const DegenerateInput&) {
      throw DegenerateInput("calibrate: " + name + " corner poses are collinear (scans " +
                            std::to_string(scans[0]->id) + "/" + std::to_string(scans[1]->id) +
                            "/" + std::to_string(scans[2]->id) + ")");
    }
    normals.push_back((a - b).cross(a - c));
  }
  RotaryFit fit;
  fit.origin = geom::median_points(centers);
  const Point3 n = geom::median_points(normals);
  if (n.norm() < 1e-12) {
    throw DegenerateInput("calibrate: " + name + " normal vectors cancel out");
  }
  fit.axis_dir = n.normalized();
  return fit;
}

/// Resolves the rotation-axis sign against scans that move only this
/// axis: the orientation whose predicted corner motion matches the
/// measurements wins. Per-axis test scans are preferred as referees.
Point3 dial_consistent_axis(const Dataset& ds, int axis, const Point3& origin,
                            const Point3& candidate,
                            const std::array<Point3, 4>& neutral_corners,
                            const std::string& name) {
  std::vector<const ScanRecord*> referees;
  for (const auto* s : ds.scans_with_tag(dataio::kTagAxisTest)) {
    if (others_neutral(*s, axis) && std::abs(s->config[axis]) > kSettingEps) {
      referees.push_back(s);
    }
  }
  if (referees.empty()) {
    for (const auto& s : ds.scans) {
      if (others_neutral(s, axis) && std::abs(s.config[axis]) > kSettingEps) {
        referees.push_back(&s);
      }
    }
  }
  if (referees.empty()) {
    spdlog::warn("calibrate: no scans available to pin the {} axis sign", name);
    return candidate;
  }

  auto error_for = [&](const Point3& dir) {
    double err = 0.0;
    for (const auto* s : referees) {
      const RigidTransform t = RigidTransform::rotation_about_axis(
          origin, dir, geom::deg2rad(s->config[axis]));
      for (int k = 0; k < 4; ++k) {
        err += (t.apply(neutral_corners[k]) - s->corners[k]).squaredNorm();
      }
    }
    return err;
  };

  if (error_for(-candidate) < error_for(candidate)) {
    spdlog::info("calibrate: flipped {} axis to match the dial direction", name);
    return -candidate;
  }
  return candidate;
}

}  // namespace

Theta calibrate(const Dataset& ds) {
  if (ds.unit != dataio::Unit::Millimeter) {
    throw DegenerateInput("calibrate: dataset must be in millimeters");
  }

  const auto neutral_train = ds.scans_with_tag(dataio::kTagNeutralTrain);
  if (neutral_train.size() < 3) {
    throw DegenerateInput(
        "calibrate: need at least three neutral-training scans, have " +
        std::to_string(neutral_train.size()));
  }

  Theta theta;
  for (int k = 1; k <= 4; ++k) {
    theta.neutral_corners[k - 1] =
        geom::median_points(dataio::group_corners(ds, k, dataio::kTagNeutralTrain));
  }

  // Linear stages: shared origin at the neutral-median first corner, x
  // pointing in the direction of increasing setting.
  const Point3 lin_origin = theta.neutral_corners[0];
  for (int axis = 0; axis < 2; ++axis) {
    const auto [hi, lo] = linear_pair(ds, axis);
    std::vector<Point3> diffs;
    for (int k = 0; k < 4; ++k) {
      diffs.push_back(hi->corners[k] - lo->corners[k]);
    }
    const Point3 x = geom::median_points(diffs);
    if (x.norm() < 1e-9) {
      throw DegenerateInput(
          "calibrate: linear stage " + std::to_string(axis + 1) +
          " travel is degenerate (scans " + std::to_string(hi->id) + "/" +
          std::to_string(lo->id) + ")");
    }
    const CoordinateSystem cs = geom::complete_right_handed_basis(lin_origin, x);
    (axis == 0 ? theta.cs_lin1 : theta.cs_lin2) = cs;
    spdlog::debug("calibrate: linear stage {} trained from scans {}/{}", axis + 1,
                  hi->id, lo->id);
  }

  // Rotary stages: origin from the median of per-corner circle centers,
  // axis from the median plane normal with the sign pinned by scans that
  // move only that stage.
  for (int axis = 2; axis < 4; ++axis) {
    const std::string name = axis == 2 ? "goniometer" : "rotation stage";
    const auto triple = rotary_triple(ds, axis);
    RotaryFit fit = fit_rotary(triple, name);
    fit.axis_dir = dial_consistent_axis(ds, axis, fit.origin, fit.axis_dir,
                                        theta.neutral_corners, name);
    const CoordinateSystem cs =
        geom::complete_right_handed_basis(fit.origin, fit.axis_dir);
    (axis == 2 ? theta.cs_gon : theta.cs_rot) = cs;
    spdlog::debug("calibrate: {} trained from scans {}/{}/{}", name, triple[0]->id,
                  triple[1]->id, triple[2]->id);
  }

  // Spheres from the first neutral-training scan carrying surface samples.
  const ScanRecord* sphere_scan = nullptr;
  for (const auto* s : neutral_train) {
    if (s->cornea_points && s->eyeball_points) {
      sphere_scan = s;
      break;
    }
  }
  if (sphere_scan == nullptr) {
    throw DegenerateInput(
        "calibrate: no neutral-training scan carries surface samples");
  }
  try {
    theta.cornea = fitting::fit_sphere_lsq(*sphere_scan->cornea_points);
    theta.eyeball = fitting::fit_sphere_lsq(*sphere_scan->eyeball_points);
  } catch (const Error& e) {
    throw DegenerateInput("calibrate: sphere fit on scan " +
                          std::to_string(sphere_scan->id) + " failed: " + e.what());
  }

  theta.validate();
  spdlog::info(
      "calibrate: cornea r={:.4f} mm (rms {:.2e}), eyeball r={:.4f} mm (rms {:.2e})",
      theta.cornea.radius, theta.cornea.rms_residual, theta.eyeball.radius,
      theta.eyeball.rms_residual);
  return theta;
}

namespace {

json matrix_to_json(const Eigen::Matrix4d& m) {
  // Stored column by column: each entry is one homogeneous position.
  json cols = json::array();
  for (int c = 0; c < 4; ++c) {
    json col = json::array();
    for (int r = 0; r < 4; ++r) col.push_back(m(r, c));
    cols.push_back(std::move(col));
  }
  return cols;
}

Eigen::Matrix4d matrix_from_json(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 4) {
    throw SchemaViolation(context + ": expected four columns");
  }
  Eigen::Matrix4d m;
  for (int c = 0; c < 4; ++c) {
    if (!j[c].is_array() || j[c].size() != 4) {
      throw SchemaViolation(context + ": column must hold four numbers");
    }
    for (int r = 0; r < 4; ++r) m(r, c) = j[c][r].get<double>();
  }
  return m;
}

json sphere_to_json(const fitting::SphereFit& s) {
  return json{{"center", {s.center.x(), s.center.y(), s.center.z()}},
              {"radius_mm", s.radius},
              {"rms_residual_mm", s.rms_residual}};
}

fitting::SphereFit sphere_from_json(const json& j, const std::string& context) {
  if (!j.contains("center") || !j.contains("radius_mm")) {
    throw SchemaViolation(context + ": missing center or radius");
  }
  fitting::SphereFit s;
  for (int i = 0; i < 3; ++i) s.center[i] = j["center"][i].get<double>();
  s.radius = j["radius_mm"].get<double>();
  s.rms_residual = j.value("rms_residual_mm", 0.0);
  return s;
}

}  // namespace

std::string theta_to_json_string(const Theta& theta) {
  json j;
  j["frames"]["lin1"] = matrix_to_json(theta.cs_lin1.m);
  j["frames"]["lin2"] = matrix_to_json(theta.cs_lin2.m);
  j["frames"]["gon"] = matrix_to_json(theta.cs_gon.m);
  j["frames"]["rot"] = matrix_to_json(theta.cs_rot.m);
  j["cornea"] = sphere_to_json(theta.cornea);
  j["eyeball"] = sphere_to_json(theta.eyeball);
  for (int k = 1; k <= 4; ++k) {
    const Point3& c = theta.neutral_corners[k - 1];
    j["neutral_corners"]["c" + std::to_string(k)] = {c.x(), c.y(), c.z()};
  }
  if (theta.referencing_config) {
    const auto p = theta.referencing_config->as_array();
    j["referencing_P"] = {p[0], p[1], p[2], p[3]};
  }
  j["dataset_sha256"] = theta.dataset_checksum;
  return j.dump(2) + "\n";
}

Theta theta_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaViolation(std::string("theta: JSON parse error: ") + e.what());
  }
  try {
    Theta theta;
    theta.cs_lin1 = CoordinateSystem::from_matrix(matrix_from_json(j.at("frames").at("lin1"), "theta lin1"));
    theta.cs_lin2 = CoordinateSystem::from_matrix(matrix_from_json(j.at("frames").at("lin2"), "theta lin2"));
    theta.cs_gon = CoordinateSystem::from_matrix(matrix_from_json(j.at("frames").at("gon"), "theta gon"));
    theta.cs_rot = CoordinateSystem::from_matrix(matrix_from_json(j.at("frames").at("rot"), "theta rot"));
    theta.cornea = sphere_from_json(j.at("cornea"), "theta cornea");
    theta.eyeball = sphere_from_json(j.at("eyeball"), "theta eyeball");
    for (int k = 1; k <= 4; ++k) {
      const auto& c = j.at("neutral_corners").at("c" + std::to_string(k));
      for (int i = 0; i < 3; ++i) theta.neutral_corners[k - 1][i] = c[i].get<double>();
    }
    if (j.contains("referencing_P")) {
      std::array<double, 4> p{};
      for (int i = 0; i < 4; ++i) p[i] = j["referencing_P"][i].get<double>();
      theta.referencing_config = StageConfig::from_array(p);
    }
    theta.dataset_checksum = j.value("dataset_sha256", "");
    theta.validate();
    return theta;
  } catch (const json::exception& e) {
    throw SchemaViolation(std::string("theta: malformed field: ") + e.what());
  }
}

void save_theta(const Theta& theta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write theta file: " + path.string());
  }
  out << theta_to_json_string(theta);
  if (!out) {
    throw IoError("write failed: " + path.string());
  }
}

Theta load_theta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open theta file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return theta_from_json_string(buffer.str());
}

}  // namespace stagekin::model
