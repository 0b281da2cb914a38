#include "stagekin/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "stagekin/fitting.hpp"

namespace stagekin::eval {

using nlohmann::json;

namespace {

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid]
                                : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

AccuracyReport evaluate_accuracy(std::span<const Point3> estimates,
                                 std::span<const Point3> truths,
                                 std::span<const StageConfig> configs) {
  if (estimates.size() != truths.size()) {
    throw SchemaViolation("evaluate_accuracy: estimate/truth row counts differ");
  }
  if (estimates.empty()) {
    throw SchemaViolation("evaluate_accuracy: no measurements");
  }
  if (!configs.empty() && configs.size() != estimates.size()) {
    throw SchemaViolation("evaluate_accuracy: config row count differs");
  }

  const std::size_t n = estimates.size();
  AccuracyReport report;
  report.n = static_cast<int>(n);
  report.rows.reserve(n);

  std::vector<double> norms(n);
  std::array<std::vector<double>, 3> comps;
  for (auto& c : comps) c.resize(n);

  Point3 mean_error = Point3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    MeasurementRow row;
    row.config = configs.empty() ? StageConfig{} : configs[i];
    row.truth = truths[i];
    row.estimate = estimates[i];
    row.error = estimates[i] - truths[i];
    norms[i] = row.error.norm();
    for (int c = 0; c < 3; ++c) comps[c][i] = row.error[c];
    mean_error += row.error;
    report.rows.push_back(row);
  }
  mean_error /= static_cast<double>(n);

  report.mean_abs = 0.0;
  for (double v : norms) report.mean_abs += v;
  report.mean_abs /= static_cast<double>(n);
  report.median_abs = median_of(norms);

  report.mean_axis = mean_error;
  for (int c = 0; c < 3; ++c) report.median_axis[c] = median_of(comps[c]);

  report.mean_relative = 0.0;
  for (const auto& row : report.rows) {
    report.mean_relative += (row.error - mean_error).norm();
  }
  report.mean_relative /= static_cast<double>(n);
  return report;
}

double evaluate_orientation(std::span<const Point3> est_axes,
                            std::span<const Point3> truth_axes) {
  if (est_axes.size() != truth_axes.size()) {
    throw SchemaViolation("evaluate_orientation: axis row counts differ");
  }
  if (est_axes.size() < 2) {
    throw SchemaViolation("evaluate_orientation: need at least two measurements");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < est_axes.size(); ++i) {
    const double est = geom::angle_between_deg(est_axes[i], est_axes[i + 1]);
    const double truth = geom::angle_between_deg(truth_axes[i], truth_axes[i + 1]);
    sum += std::abs(est - truth);
  }
  return sum / static_cast<double>(est_axes.size() - 1);
}

double consistency_corner_reprojection(const Theta& theta, const Dataset& ds) {
  const auto test_scans = ds.scans_with_tag(dataio::kTagAxisTest);
  if (test_scans.empty()) {
    throw DegenerateInput("corner reprojection: dataset has no per-axis test scans");
  }
  if (ds.scans_with_tag(dataio::kTagNeutralTest).empty()) {
    throw DegenerateInput("corner reprojection: dataset has no neutral-testing scans");
  }

  std::array<Point3, 4> base;
  for (int k = 1; k <= 4; ++k) {
    base[k - 1] = geom::median_points(
        dataio::group_corners(ds, k, dataio::kTagNeutralTest));
  }

  double sum = 0.0;
  int count = 0;
  for (const auto* scan : test_scans) {
    const auto predicted = model::pose_points(theta, scan->config, base);
    for (int k = 0; k < 4; ++k) {
      sum += (predicted[k] - scan->corners[k]).norm();
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

std::array<double, 3> consistency_axis_angles(const Theta& theta) {
  return {geom::angle_between_deg(theta.cs_lin1.x_axis(), theta.cs_lin2.x_axis()),
          geom::angle_between_deg(theta.cs_lin2.x_axis(), theta.cs_gon.x_axis()),
          geom::angle_between_deg(theta.cs_gon.x_axis(), theta.cs_rot.x_axis())};
}

double consistency_fit_refit(const Dataset& ds, const Theta* theta,
                             FitRefitMode mode) {
  std::vector<Point3> centers;
  for (const auto& scan : ds.scans) {
    if (!scan.cornea_points) continue;
    Point3 center = fitting::fit_sphere_lsq(*scan.cornea_points).center;
    if (!scan.config.is_neutral()) {
      if (theta == nullptr) {
        throw DegenerateInput(
            "fit-refit: scan " + std::to_string(scan.id) +
            " was acquired away from neutral; a calibrated model is required");
      }
      center = model::rigid_motion_of(*theta, scan.config).inverse().apply(center);
    }
    centers.push_back(center);
  }
  if (centers.size() < 2) {
    throw DegenerateInput("fit-refit: need at least two scans with cornea samples");
  }

  if (mode == FitRefitMode::Centroid) {
    Point3 centroid = Point3::Zero();
    for (const auto& c : centers) centroid += c;
    centroid /= static_cast<double>(centers.size());
    double sum = 0.0;
    for (const auto& c : centers) sum += (c - centroid).norm();
    return sum / static_cast<double>(centers.size());
  }

  double sum = 0.0;
  int pairs = 0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    for (std::size_t j = i + 1; j < centers.size(); ++j) {
      sum += (centers[i] - centers[j]).norm();
      ++pairs;
    }
  }
  return sum / static_cast<double>(pairs);
}

std::string dof_label(const StageConfig& cfg) {
  int moving = -1;
  int count = 0;
  for (int i = 0; i < 4; ++i) {
    if (cfg[i] != 0.0) {
      moving = i;
      ++count;
    }
  }
  if (count == 0) return "neutral";
  if (count > 1) return "mixed";
  return "P" + std::to_string(moving + 1);
}

namespace {

json point_to_json(const Point3& p) { return json::array({p.x(), p.y(), p.z()}); }

}  // namespace

std::string accuracy_report_to_json_string(const AccuracyReport& report) {
  json j;
  j["n"] = report.n;
  j["mean_abs_mm"] = report.mean_abs;
  j["median_abs_mm"] = report.median_abs;
  j["mean_axis_mm"] = point_to_json(report.mean_axis);
  j["median_axis_mm"] = point_to_json(report.median_axis);
  j["mean_relative_mm"] = report.mean_relative;
  if (report.mean_rel_angle_deg) {
    j["mean_rel_angle_deg"] = *report.mean_rel_angle_deg;
  } else {
    j["mean_rel_angle_deg"] = nullptr;
  }
  j["rows"] = json::array();
  for (const auto& row : report.rows) {
    const auto p = row.config.as_array();
    j["rows"].push_back({{"P", {p[0], p[1], p[2], p[3]}},
                         {"dof", dof_label(row.config)},
                         {"truth", point_to_json(row.truth)},
                         {"estimate", point_to_json(row.estimate)},
                         {"error", point_to_json(row.error)}});
  }
  return j.dump(2) + "\n";
}

std::string consistency_report_to_json_string(const ConsistencyReport& report) {
  json j;
  j["corner_reprojection_mean_mm"] = report.corner_reprojection_mean_mm;
  j["inter_axis_angles_deg"] = report.inter_axis_angles_deg;
  j["fit_refit_mean_mm"] = report.fit_refit_mean_mm;
  return j.dump(2) + "\n";
}

namespace {

void write_scatter(const AccuracyReport& report, const std::filesystem::path& path,
                   int axis_a, int axis_b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write scatter file: " + path.string());
  out << "id,dof,truth_a,truth_b,est_a,est_b\n";
  char line[256];
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    std::snprintf(line, sizeof(line), "%zu,%s,%.9g,%.9g,%.9g,%.9g\n", i + 1,
                  dof_label(row.config).c_str(), row.truth[axis_a],
                  row.truth[axis_b], row.estimate[axis_a], row.estimate[axis_b]);
    out << line;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_scatter_csv(const AccuracyReport& report,
                       const std::filesystem::path& xy_path,
                       const std::filesystem::path& xz_path) {
  write_scatter(report, xy_path, 0, 1);
  write_scatter(report, xz_path, 0, 2);
}

}  // namespace stagekin::eval
