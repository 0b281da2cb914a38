#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stagekin/dataio.hpp"
#include "stagekin/stage_model.hpp"

namespace stagekin::eval {

using dataio::Dataset;
using dataio::StageConfig;
using geom::Point3;
using model::Theta;

struct MeasurementRow {
  StageConfig config;
  Point3 truth;
  Point3 estimate;
  Point3 error;  // estimate - truth
};

/// Tracker accuracy statistics over matched estimate/truth pairs. Norm
/// statistics (mean_abs, median_abs, mean_relative) are Euclidean; the
/// per-axis statistics are signed component means/medians.
struct AccuracyReport {
  int n = 0;
  double mean_abs = 0.0;
  double median_abs = 0.0;
  Point3 mean_axis = Point3::Zero();
  Point3 median_axis = Point3::Zero();
  /// Mean error norm after subtracting the mean error vector.
  double mean_relative = 0.0;
  std::optional<double> mean_rel_angle_deg;
  std::vector<MeasurementRow> rows;
};

struct ConsistencyReport {
  double corner_reprojection_mean_mm = 0.0;
  std::array<double, 3> inter_axis_angles_deg{};
  double fit_refit_mean_mm = 0.0;
};

/// Per-row error statistics for matched point lists. `configs` is
/// optional row metadata carried into the report and scatter output.
AccuracyReport evaluate_accuracy(std::span<const Point3> estimates,
                                 std::span<const Point3> truths,
                                 std::span<const StageConfig> configs = {});

/// Mean absolute difference, in degrees, between consecutive-measurement
/// relative angles of the estimated and true axis sequences. Invariant
/// under a global rotation of either sequence.
double evaluate_orientation(std::span<const Point3> est_axes,
                            std::span<const Point3> truth_axes);

/// Mean deviation between measured per-axis-test corners and the model
/// prediction obtained by posing the neutral-testing corner medians at
/// each test scan's configuration.
double consistency_corner_reprojection(const Theta& theta, const Dataset& ds);

/// Angles between consecutive stage x-axes: lin1-lin2, lin2-gon, gon-rot.
std::array<double, 3> consistency_axis_angles(const Theta& theta);

enum class FitRefitMode { Pairwise, Centroid };

/// Refits the cornea sphere per surface-sample scan and returns the mean
/// deviation between the centers after posing each fit back to the
/// neutral configuration (Pairwise: mean over all center pairs;
/// Centroid: mean distance to the centroid of the centers). `theta` is
/// only needed when a sample scan was acquired away from neutral.
double consistency_fit_refit(const Dataset& ds, const Theta* theta = nullptr,
                             FitRefitMode mode = FitRefitMode::Pairwise);

/// Label for the degree of freedom a configuration exercises:
/// "neutral", "P1".."P4", or "mixed".
std::string dof_label(const StageConfig& cfg);

std::string accuracy_report_to_json_string(const AccuracyReport& report);
std::string consistency_report_to_json_string(const ConsistencyReport& report);

/// Scatter CSVs for the X/Y and X/Z planes with columns
/// id,dof,truth_a,truth_b,est_a,est_b (a/b are the plane axes, mm).
void write_scatter_csv(const AccuracyReport& report,
                       const std::filesystem::path& xy_path,
                       const std::filesystem::path& xz_path);

}  // namespace stagekin::eval
