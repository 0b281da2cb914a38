#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stagekin/dataio.hpp"
#include "stagekin/geometry.hpp"

namespace stagekin::sim {

using dataio::Dataset;
using dataio::StageConfig;
using geom::Point3;
using geom::RigidTransform;

/// Construction parameters for a synthetic testing stage.
struct StageSpec {
  /// Consecutive angles between the stage axes: lin1-lin2, lin2-gon,
  /// gon-rot. 90/90/90 is an ideally mounted stage.
  std::array<double, 3> inter_axis_angles_deg{90.0, 90.0, 90.0};
  int cornea_samples = 80;
  int eyeball_samples = 240;
  std::uint64_t seed = 0;
};

/// Angle preset matching the imperfect mounting of the physical stage.
StageSpec reference_stage_spec();

/// The synthetic ground-truth stage: one axis per microstage in direct
/// parametric form (origin plus unit direction in the common volume
/// frame), true sphere centers and radii, true holder corner positions
/// and the surface sample counts.
struct TruthStage {
  std::array<Point3, 4> axis_origins{};
  std::array<Point3, 4> axis_dirs{};
  std::array<Point3, 4> corners{};  // planar holder quad, index k-1 = corner k
  Point3 z_c = Point3::Zero();
  Point3 z_e = Point3::Zero();
  double cornea_radius_mm = 0.0;
  double eyeball_radius_mm = 0.0;
  std::array<double, 3> inter_axis_angles_deg{90.0, 90.0, 90.0};
  int cornea_samples = 0;
  int eyeball_samples = 0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Noise model for synthetic data: isotropic Gaussian per data class, a
/// constant tracker bias and an angular perturbation of the estimated
/// geometrical axis.
struct NoiseSpec {
  double corner_sigma_mm = 0.0;
  double surface_sigma_mm = 0.0;
  double tracker_sigma_mm = 0.0;
  Point3 tracker_bias_mm = Point3::Zero();
  double axis_noise_deg = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One row of an acquisition plan.
struct PlanRow {
  int id = 0;
  StageConfig config;
  std::set<int> types;
};

/// The standard 15-scan acquisition plan.
std::vector<PlanRow> standard_acquisition_plan();

/// The 20 evaluation configurations used for the tracker accuracy study:
/// five settings per microstage with the remaining stages neutral.
/// Rotation-stage dial readings are converted to neutral-relative values
/// with a dial offset of 300 degrees.
std::vector<StageConfig> reference_evaluation_configs();

/// The stage configuration at which the checkerboard was exposed for
/// external referencing.
StageConfig default_referencing_config();

/// Deterministically constructs the ground-truth stage for a spec.
TruthStage synthesize_stage(const StageSpec& spec);

/// Net world transform of top-of-stack payload for a configuration,
/// composed directly from the true axes: screws about the neutral axis
/// locations, multiplied bottom-to-top. Shares no code with the
/// calibrated model's conjugation workflow, so agreement between the two
/// is meaningful.
RigidTransform direct_transform(const TruthStage& truth, const StageConfig& cfg);

/// Generates a dataset for an acquisition plan: corner positions by
/// direct transform composition, surface samples on the true cornea cap
/// (polar angle up to 60 degrees) and the full eyeball sphere, Gaussian
/// noise per the spec. Reproducible by seed.
Dataset generate_dataset(const TruthStage& truth, const std::vector<PlanRow>& plan,
                         const NoiseSpec& noise);

/// True eye state in the checkerboard frame, computed on the direct path.
struct CbTruth {
  Point3 z_c;
  Point3 z_e;
  Point3 axis;
};

CbTruth true_state_in_cb(const TruthStage& truth, const StageConfig& measurement,
                         const StageConfig& referencing);

struct TrackerEstimate {
  StageConfig config;
  Point3 z_c_star;
  Point3 axis_star;
};

/// Simulated tracker output: the true cornea center in the checkerboard
/// frame plus bias and Gaussian noise, and the true geometrical axis
/// perturbed by the angular noise.
std::vector<TrackerEstimate> simulate_tracker(const TruthStage& truth,
                                              const std::vector<StageConfig>& configs,
                                              const StageConfig& referencing,
                                              const NoiseSpec& noise);

std::string truth_to_json_string(const TruthStage& truth);
TruthStage truth_from_json_string(const std::string& text);
void save_truth(const TruthStage& truth, const std::filesystem::path& path);
TruthStage load_truth(const std::filesystem::path& path);

std::string estimates_to_json_string(const std::vector<TrackerEstimate>& estimates,
                                     const StageConfig& referencing);
struct EstimatesFile {
  StageConfig referencing;
  std::vector<TrackerEstimate> estimates;
};
EstimatesFile estimates_from_json_string(const std::string& text);
void save_estimates(const std::vector<TrackerEstimate>& estimates,
                    const StageConfig& referencing, const std::filesystem::path& path);
EstimatesFile load_estimates(const std::filesystem::path& path);

}  // namespace stagekin::sim
