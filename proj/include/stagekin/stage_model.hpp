#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stagekin/dataio.hpp"
#include "stagekin/fitting.hpp"
#include "stagekin/geometry.hpp"

namespace stagekin::model {

using dataio::Dataset;
using dataio::StageConfig;
using geom::CoordinateSystem;
using geom::Point3;
using geom::RigidTransform;

/// The microstage stack from bottom to top: two linear stages, the
/// goniometer and the rotation stage.
enum class StageAxis { Lin1 = 0, Lin2 = 1, Gon = 2, Rot = 3 };

/// The calibrated internal model: one frame per microstage (expressed in
/// the common volume frame), the cornea and eyeball best-fit spheres in
/// neutral position, and the neutral checkerboard corner medians the
/// output frame is built from.
struct Theta {
  CoordinateSystem cs_lin1;
  CoordinateSystem cs_lin2;
  CoordinateSystem cs_gon;
  CoordinateSystem cs_rot;
  fitting::SphereFit cornea;   // center is the neutral z_c
  fitting::SphereFit eyeball;  // center is the neutral z_e
  std::array<Point3, 4> neutral_corners{};
  std::optional<StageConfig> referencing_config;
  std::string dataset_checksum;

  /// Throws when a frame invariant fails, the cornea sphere is not
  /// smaller than the eyeball sphere, or the two centers coincide.
  void validate() const;
};

/// Frames and sphere centers after driving the stage stack to a
/// configuration.
struct PosedModel {
  CoordinateSystem lin1, lin2, gon, rot;
  Point3 z_c;
  Point3 z_e;
};

/// Ground-truth eye state expressed in the checkerboard frame.
struct GroundTruth {
  Point3 z_c;
  Point3 z_e;
  Point3 geometrical_axis;  // normalize(z_c - z_e)
};

/// The local stage motion: translation along x for the linear stages,
/// rotation about x for the goniometer and rotation stage. Angles are
/// degrees, translations millimeters.
RigidTransform stage_transform(StageAxis axis, double value);

/// Calibrates the internal model from a millimeter-unit dataset laid out
/// like the standard acquisition plan. Throws DegenerateInput (naming the
/// offending scans or group) when required scans are missing or a fit
/// degenerates.
Theta calibrate(const Dataset& ds);

/// Drives the stage stack bottom-to-top: each configured stage conjugates
/// every frame above it and both sphere centers through that stage's
/// frame. Neutral settings are exact no-ops.
PosedModel forward_kinematics(const Theta& theta, const StageConfig& cfg);

/// Poses arbitrary payload points riding on top of the stack (e.g.
/// checkerboard corners) through the same chain.
std::vector<Point3> pose_points(const Theta& theta, const StageConfig& cfg,
                                std::span<const Point3> points);

/// Poses a payload frame riding on top of the stack.
CoordinateSystem pose_frame(const Theta& theta, const StageConfig& cfg,
                            const CoordinateSystem& frame);

/// The net rigid world motion the chain applies to top-of-stack payload
/// at `cfg`.
RigidTransform rigid_motion_of(const Theta& theta, const StageConfig& cfg);

/// Builds the checkerboard frame from the neutral corner medians (origin
/// at corner 4, x toward corner 1, y toward corner 3 orthogonalized, z
/// completing the right-handed frame) and poses it at the referencing
/// configuration.
CoordinateSystem build_cs_cb(const Theta& theta,
                             const StageConfig& referencing_cfg);

/// Sphere centers at `measurement_cfg`, expressed in the checkerboard
/// frame posed at `referencing_cfg`, plus the geometrical axis.
GroundTruth ground_truth_in_cb(const Theta& theta,
                               const StageConfig& measurement_cfg,
                               const StageConfig& referencing_cfg);

std::string theta_to_json_string(const Theta& theta);
Theta theta_from_json_string(const std::string& text);
void save_theta(const Theta& theta, const std::filesystem::path& path);
Theta load_theta(const std::filesystem::path& path);

}  // namespace stagekin::model
