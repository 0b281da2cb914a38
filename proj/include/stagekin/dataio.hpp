#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "stagekin/geometry.hpp"

namespace stagekin::dataio {

using geom::Point3;

/// Tags describing what a scan is used for: 1 = neutral training,
/// 2 = neutral testing, 3 = linear-stage training, 4 = rotary-stage
/// training, 5 = per-axis testing.
inline constexpr int kTagNeutralTrain = 1;
inline constexpr int kTagNeutralTest = 2;
inline constexpr int kTagLinearTrain = 3;
inline constexpr int kTagRotaryTrain = 4;
inline constexpr int kTagAxisTest = 5;

/// The four microstage settings relative to the trained neutral position:
/// two translations in millimeters, goniometer and rotation-stage angles
/// in degrees.
struct StageConfig {
  double p1_mm = 0.0;
  double p2_mm = 0.0;
  double p3_deg = 0.0;
  double p4_deg = 0.0;

  double operator[](int i) const;
  std::array<double, 4> as_array() const { return {p1_mm, p2_mm, p3_deg, p4_deg}; }
  static StageConfig from_array(const std::array<double, 4>& p) {
    return {p[0], p[1], p[2], p[3]};
  }
  bool is_neutral(double eps = 0.0) const;

  /// Throws SchemaViolation when a setting is non-finite or outside the
  /// stage travel bounds (|P1|,|P2| <= 25 mm, |P3| <= 25 deg, |P4| < 360 deg).
  void validate(const std::string& context) const;
};

bool operator==(const StageConfig& a, const StageConfig& b);

/// One scan: fiducial corner positions, optional eye-surface samples,
/// type tags and the stage settings the scan was acquired at.
struct ScanRecord {
  int id = 0;
  StageConfig config;
  std::set<int> types;
  std::array<Point3, 4> corners{};  // index k-1 holds corner k
  std::optional<std::vector<Point3>> cornea_points;
  std::optional<std::vector<Point3>> eyeball_points;

  bool has_tag(int tag) const { return types.count(tag) > 0; }
};

enum class Unit { Voxel, Millimeter };

struct Dataset {
  Unit unit = Unit::Millimeter;
  double voxel_size_mm = 0.025;
  std::array<double, 4> dial_offsets{0, 0, 0, 0};
  std::vector<ScanRecord> scans;

  /// Scans carrying `tag`, ordered by id.
  std::vector<const ScanRecord*> scans_with_tag(int tag) const;
};

/// Parses and validates a dataset file. Structural problems (duplicate
/// ids, missing corners, unit missing, surface samples on non-neutral
/// scans) raise SchemaViolation naming the offending scan; missing files
/// raise IoError. Acquisition coverage is checked at calibration time,
/// not here.
Dataset load_dataset(const std::filesystem::path& path);

/// Serializes a dataset back to the file schema (stage settings are
/// written with the dial offsets re-applied).
void save_dataset(const Dataset& ds, const std::filesystem::path& path);

std::string dataset_to_json_string(const Dataset& ds);
Dataset dataset_from_json_string(const std::string& text);

/// Converts all coordinates from voxels to millimeters using
/// voxel_size_mm. A dataset already in millimeters is returned unchanged
/// with a warning.
Dataset to_millimeters(const Dataset& ds);

/// Inverse conversion, used when emitting synthetic voxel-space data.
Dataset to_voxels(const Dataset& ds);

/// Corner k (1-4) of every scan tagged `type_tag`, ordered by scan id.
/// Throws DegenerateInput when the group is empty.
std::vector<Point3> group_corners(const Dataset& ds, int k, int type_tag);

}  // namespace stagekin::dataio
